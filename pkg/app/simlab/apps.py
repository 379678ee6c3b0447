from django.apps import AppConfig


class SimlabConfig(AppConfig):
    """Scenario graphs, simulated data and replicated studies."""
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'simlab'
