"""
Django settings for the multising project.

The project has no web surface and no database: Django supplies the
management-command CLI, the test runner and the logging configuration,
Django REST framework supplies the serializers that validate run, study
and ingestion configs.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""
import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get(
    'MULTISING_SECRET_KEY',
    'multising-local-only-not-used-for-signing'
)

DEBUG = False

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'core',
    'sampler',
    'graphsel',
    'simlab',
    'dataio',
]

# No database persistence; chains and summaries are written to files.

DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
# https://docs.djangoproject.com/en/4.2/topics/logging/

LOG_LEVEL = os.environ.get('MULTISING_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        name: {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        }
        for name in ('core', 'sampler', 'graphsel', 'simlab', 'dataio')
    },
}

# Model and sampler defaults. Hyper-parameters follow the recommended
# settings for moderate a-priori sparsity; spike-and-slab variances and the
# separate-model edge prior depend on p and are resolved at run time.

MULTISING = {
    'OUTPUT_ROOT': os.environ.get('MULTISING_OUTPUT_ROOT', 'runs'),
    'WORKERS': int(os.environ.get('MULTISING_WORKERS', 1)),
    'EXACT_P_LIMIT': 20,
    'RUN': {
        'engine': 'fb',
        'iterations': 10000,
        'burn_in': 2000,
        'thin': 10,
        'seed': 0,
        'g': 0.02,
        'alpha': 1.0,
        'beta': 2.0,
        'omega': 0.6,
        'omega_adjacent': None,
        'a': 1.0,
        'b': 3.0,
        'sigma': 0.1,
        'theta_proposal_alpha': 2.0,
        'theta_proposal_beta': 2.0,
        'nu_proposal_a': 1.0,
        'nu_proposal_b': 2.0,
        'coupling_likelihood': 'joint',
        'scan': 'systematic',
        'cutoff': 0.5,
        'fdr_bound': 0.5,
        'sweeps': 1,
        'tune_step_size': True,
        'laplace_cache_size': 4096,
        'laplace_failure_rate': 0.05,
        'keep_lambda': True,
        'log_every': 1000,
    },
    'SIMULATION': {
        'main_effect': -1.0,
        'interaction': 1.5,
        'attachment': 1,
        'gibbs_burn_in': 1000,
        'gibbs_thin': 10,
    },
    'QUANTILE_BLOCKS': 20,
}
