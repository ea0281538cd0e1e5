import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-benchmark-key-change-in-production')

DEBUG = os.environ.get('DEBUG', 'True').lower() == 'true'

ALLOWED_HOSTS = os.environ.get('ALLOWED_HOSTS', '*').split(',')

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'multilinear.apps.MultilinearConfig',
]

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.environ.get('MULTILINEAR_DB', BASE_DIR / 'db.sqlite3'),
    }
}

TIME_ZONE = 'UTC'

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Solver tunables. Every key can be overridden with MULTILINEAR_<KEY>.
MULTILINEAR = {
    'ORACLE_TERM_CAP': int(os.environ.get('MULTILINEAR_ORACLE_TERM_CAP', 10**6)),
    'ABP_WIDTH_CAP': int(os.environ.get('MULTILINEAR_ABP_WIDTH_CAP', 4096)),
    'RPER_BRUTE_BUDGET': int(os.environ.get('MULTILINEAR_RPER_BRUTE_BUDGET', 10**6)),
    'RPER_RYSER_BUDGET': int(os.environ.get('MULTILINEAR_RPER_RYSER_BUDGET', 10**7)),
    'RPER_TABLE_BUDGET': int(os.environ.get('MULTILINEAR_RPER_TABLE_BUDGET', 10**6)),
    'DEFAULT_FIELD': int(os.environ.get('MULTILINEAR_DEFAULT_FIELD', 1000003)),
    'PRIME_BITS': int(os.environ.get('MULTILINEAR_PRIME_BITS', 62)),
    'THREADS': int(os.environ.get('MULTILINEAR_THREADS', os.cpu_count() or 1)),
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'multilinear': {
            'handlers': ['console'],
            'level': os.environ.get('MULTILINEAR_LOG_LEVEL', 'WARNING'),
        },
    },
}
