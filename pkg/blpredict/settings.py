from __future__ import annotations

import os
from pathlib import Path

from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / ".env")


SECRET_KEY = os.environ.get("SECRET_KEY", "dev-key-change-in-production")
DEBUG = os.environ.get("DEBUG", "false").lower() == "true"

ALLOWED_HOSTS = [
    h.strip()
    for h in os.environ.get("ALLOWED_HOSTS", "localhost,127.0.0.1").split(",")
    if h.strip()
]


INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    "simple_history",
    "experiments.apps.ExperimentsConfig",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
    "simple_history.middleware.HistoryRequestMiddleware",
]

ROOT_URLCONF = "blpredict.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.debug",
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    }
]


DATABASE_PATH = Path(
    os.environ.get("DATABASE_PATH", str(BASE_DIR / "db.sqlite3"))
)
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": DATABASE_PATH,
    }
}


LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True

STATIC_URL = "static/"

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


#
# Where experiment artifacts are written when a config does not name an
# output directory.
#
BLP_OUTPUT_DIR = Path(os.environ.get("BLP_OUTPUT_DIR", str(BASE_DIR / "runs")))

# Worker processes for replicate simulation and predictor scoring.
BLP_WORKERS = int(os.environ.get("BLP_WORKERS", "1"))

# Closed-form covariance oracle: FFT length and frequency cutoff (in units of
# the kernel's characteristic rate).
BLP_ORACLE_NODES = int(os.environ.get("BLP_ORACLE_NODES", str(2**20)))
BLP_ORACLE_CUTOFF = float(os.environ.get("BLP_ORACLE_CUTOFF", "50"))

# Ridge added to the lag-zero block when a solver is asked to regularise.
BLP_RIDGE_SCALE = float(os.environ.get("BLP_RIDGE_SCALE", "1e-8"))

BLP_BOOTSTRAP_RESAMPLES = int(os.environ.get("BLP_BOOTSTRAP_RESAMPLES", "200"))
BLP_BENCH_REPEATS = int(os.environ.get("BLP_BENCH_REPEATS", "5"))

# Pipeline runs are recorded in the database unless disabled.
BLP_RECORD_RUNS = os.environ.get("BLP_RECORD_RUNS", "true").lower() == "true"


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        name: {
            "handlers": ["console"],
            "level": os.environ.get("BLP_LOG_LEVEL", "INFO"),
            "propagate": False,
        }
        for name in (
            "pointprocess",
            "simulators",
            "moments",
            "solvers",
            "innovations",
            "prediction",
            "experiments",
        )
    },
}
