import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'multising.settings')
django.setup()
