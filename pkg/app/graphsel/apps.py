from django.apps import AppConfig


class GraphselConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'graphsel'
