import os

from django.conf import settings

DEFAULTS = {
    'ORACLE_TERM_CAP': 10**6,
    'ABP_WIDTH_CAP': 4096,
    'RPER_BRUTE_BUDGET': 10**6,
    'RPER_RYSER_BUDGET': 10**7,
    'RPER_TABLE_BUDGET': 10**6,
    'DEFAULT_FIELD': 1000003,
    'PRIME_BITS': 62,
    'THREADS': os.cpu_count() or 1,
}


def get_setting(name):
    """Look up a solver tunable, falling back to the defaults outside Django."""
    if settings.configured:
        return getattr(settings, 'MULTILINEAR', {}).get(name, DEFAULTS[name])
    return DEFAULTS[name]
