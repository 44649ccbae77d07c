"""Application configuration and hard limits."""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path


ROOT_DIR = Path(__file__).resolve().parents[1]

# Runtime environment modes.
ENVIRONMENT: str = os.getenv("ENVIRONMENT", "prod").strip().lower()

IS_PROD = ENVIRONMENT == "prod"
IS_TEST = ENVIRONMENT == "test"
IS_DEV = ENVIRONMENT == "dev"

LOG_LEVEL: str = os.getenv("LOG_LEVEL", "DEBUG" if IS_DEV else "WARNING").strip().upper()
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

ALGEBRA_CORPUS_DIR_ENV = "ALGEBRA_CORPUS_DIR"

# Associativity/unitality checks at load are O(d^4).
MAX_ALGEBRA_DIM = int(os.getenv("MAX_ALGEBRA_DIM", "16"))

# Brute-force enumeration over finite fields visits at most this many points.
ENUMERATION_LIMIT = int(os.getenv("ENUMERATION_LIMIT", "20000"))

SPECTRUM_MAX_DEGREE = int(os.getenv("SPECTRUM_MAX_DEGREE", "1000"))
SPECTRUM_MAX_INDEX = int(os.getenv("SPECTRUM_MAX_INDEX", "100000"))


def get_corpus_dir() -> Path:
    """Resolve the bundled algebra directory at runtime so tests can redirect it."""
    override = os.getenv(ALGEBRA_CORPUS_DIR_ENV, "").strip()
    if override:
        return Path(override)
    return ROOT_DIR / "algebras"


def configure_logging(level: str | None = None) -> logging.Logger:
    """Attach one stderr handler to the package logger; stdout stays for command output."""
    logger = logging.getLogger("app")
    resolved = (level or LOG_LEVEL).upper()
    logger.setLevel(getattr(logging, resolved, logging.WARNING))
    if not any(getattr(handler, "_app_handler", False) for handler in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._app_handler = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    return logger
