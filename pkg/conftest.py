import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "EasyRSMA.settings")
django.setup()
