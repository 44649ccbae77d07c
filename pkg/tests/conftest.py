import os
import sys
from pathlib import Path

import pytest


ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

# Keep tests deterministic and independent from local shell configuration.
os.environ.setdefault("ENVIRONMENT", "test")

CORPUS_DIR = ROOT / "algebras"


@pytest.fixture
def corpus_dir() -> Path:
    return CORPUS_DIR


@pytest.fixture
def load_bundled():
    from app.algebra import load_algebra_file

    def _load(name: str):
        return load_algebra_file(CORPUS_DIR / f"{name}.json")

    return _load
