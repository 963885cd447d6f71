import os
from pathlib import Path

from decouple import config
from django.core.exceptions import ImproperlyConfigured

# Sentry error reporting, only when SENTRY_DSN is set
import sentry_sdk
from sentry_sdk.integrations.django import DjangoIntegration

if os.environ.get('SENTRY_DSN'):
    sentry_sdk.init(
        dsn=os.environ.get('SENTRY_DSN'),
        integrations=[
            DjangoIntegration(),
        ],
        environment=os.environ.get('ENVIRONMENT', 'development'),
        send_default_pii=False,
        sample_rate=1.0,
    )

BASE_DIR = Path(__file__).resolve().parent.parent

# No HTTP surface; nothing is signed with this key.
SECRET_KEY = config('SECRET_KEY', default='sparsecert-local-development-key-not-used-for-signing-anything')
DEBUG = config('DEBUG', default=False, cast=bool)
ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'rest_framework',
    'recovery',
]

# Database - SQLite unless DATABASE_URL is given
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

import dj_database_url
if config('DATABASE_URL', default=None):
    DATABASES['default'] = dj_database_url.parse(
        config('DATABASE_URL'),
        conn_max_age=600,
        conn_health_checks=True,
    )

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'
USE_TZ = True
TIME_ZONE = 'UTC'

# Numerical defaults; CLI flags override them per invocation
SPARSECERT_RANK_TOL = config('SPARSECERT_RANK_TOL', default=1e-10, cast=float)
SPARSECERT_TIE_TOL = config('SPARSECERT_TIE_TOL', default=1e-9, cast=float)
SPARSECERT_CERT_TOL = config('SPARSECERT_CERT_TOL', default=1e-9, cast=float)
SPARSECERT_MAX_SUBSETS = config('SPARSECERT_MAX_SUBSETS', default=1_000_000, cast=int)
SPARSECERT_SEED = config('SPARSECERT_SEED', default=0, cast=int)
SPARSECERT_JOBS = config('SPARSECERT_JOBS', default=1, cast=int)

for _name in ('SPARSECERT_RANK_TOL', 'SPARSECERT_TIE_TOL', 'SPARSECERT_CERT_TOL'):
    if not 0.0 <= globals()[_name] < 1e-3:
        raise ImproperlyConfigured(f"{_name} must lie in [0, 1e-3) (current: {globals()[_name]})")

if SPARSECERT_MAX_SUBSETS < 1:
    raise ImproperlyConfigured(f"SPARSECERT_MAX_SUBSETS must be positive (current: {SPARSECERT_MAX_SUBSETS})")

# Logging
SPARSECERT_LOG = config('SPARSECERT_LOG', default='WARNING').upper()
SPARSECERT_LOG_FILE = config('SPARSECERT_LOG_FILE', default='')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
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
        'recovery': {
            'handlers': ['console'],
            'level': SPARSECERT_LOG,
            'propagate': False,
        },
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
}

if SPARSECERT_LOG_FILE:
    LOGGING['handlers']['file'] = {
        'class': 'logging.handlers.RotatingFileHandler',
        'filename': SPARSECERT_LOG_FILE,
        'maxBytes': 10485760,  # 10MB
        'backupCount': 5,
        'formatter': 'verbose',
    }
    for _logger in LOGGING['loggers'].values():
        _logger['handlers'].append('file')
    LOGGING['root']['handlers'].append('file')
