from django.apps import AppConfig


class CoreConfig(AppConfig):
    """Ising likelihoods, priors and the shared domain types."""
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'core'
    verbose_name = 'Ising core'
