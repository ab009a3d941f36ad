"""
Logging setup shared by the CLI and the smoke script
"""
import logging
import logging.config
from typing import Optional

from slickqsvm.core.config import settings

GENERIC_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"
DATE_FORMAT = "%H:%M:%S"


def configure_logging(level: Optional[str] = None) -> None:
    """Install one stderr handler with the generic formatter on the root logger"""
    level = (level or settings.LOG_LEVEL).upper()
    logging.config.dictConfig(
        {
            "version": 1,
            "disable_existing_loggers": False,
            "formatters": {
                "generic": {"format": GENERIC_FORMAT, "datefmt": DATE_FORMAT},
            },
            "handlers": {
                "console": {
                    "class": "logging.StreamHandler",
                    "stream": "ext://sys.stderr",
                    "formatter": "generic",
                    "level": "NOTSET",
                },
            },
            "root": {"level": level, "handlers": ["console"]},
            "loggers": {
                # numba's compiler logs at DEBUG are noise for pipeline runs
                "numba": {"level": "WARNING"},
                "sqlalchemy.engine": {"level": "WARNING"},
                "PIL": {"level": "WARNING"},
            },
        }
    )
