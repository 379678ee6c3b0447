"""Shared plumbing for the multising management commands."""
import logging
import platform

import django
import numpy as np
import pandas as pd
import scipy
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from core.exceptions import EXIT_CONFIG, ConfigError, MultisingError
from dataio.store import read_json

APPS = ('core', 'sampler', 'graphsel', 'simlab', 'dataio')

VERBOSITY_LEVELS = {
    0: logging.ERROR,
    2: logging.INFO,
    3: logging.DEBUG,
}


def versions():
    return {
        'python': platform.python_version(),
        'django': django.get_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
    }


def format_errors(detail):
    """Flatten serializer errors into ``field: message`` lines."""
    if isinstance(detail, dict):
        return '; '.join(
            f'{name}: {format_errors(value)}' for name, value in
            detail.items()
        )
    if isinstance(detail, list):
        return ' '.join(format_errors(value) for value in detail)
    return str(detail)


class MultisingCommand(BaseCommand):
    """Command whose library errors end the process with their exit code.

    Subclasses implement ``run`` instead of ``handle``.
    """

    def handle(self, *args, **options):
        level = VERBOSITY_LEVELS.get(options.get('verbosity', 1))
        if level is not None:
            for name in APPS:
                logging.getLogger(name).setLevel(level)
        try:
            return self.run(*args, **options)
        except serializers.ValidationError as exc:
            raise CommandError(
                f'Invalid configuration: {format_errors(exc.detail)}',
                returncode=EXIT_CONFIG,
            ) from exc
        except MultisingError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

    def run(self, *args, **options):
        raise NotImplementedError

    def validated(self, serializer_class, data, **context):
        """Validate ``data`` and return the object the serializer creates."""
        serializer = serializer_class(data=data, context=context)
        serializer.is_valid(raise_exception=True)
        return serializer.save()

    def success(self, message):
        self.stdout.write(self.style.SUCCESS(message))


def load_settings(path):
    """Settings object from an optional JSON file, or an empty dict."""
    if not path:
        return {}
    values = read_json(path)
    if not isinstance(values, dict):
        raise ConfigError(f'{path} must hold a JSON object.')
    return values
