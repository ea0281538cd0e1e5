from django.apps import AppConfig


class MultilinearConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'multilinear'
    verbose_name = 'Multilinear monomial counting and detection'
