import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

FIXTURES_DIR = Path(__file__).parent / "fixtures"


@pytest.fixture
def t2_generator():
    from src.chain import AbsorbedGenerator

    return AbsorbedGenerator(rates=np.array([[0.0, 1.0], [2.0, 0.0]]), kill=np.array([1.0, 0.0]))


@pytest.fixture(scope="session")
def logistic_spec():
    from src.models import BDSpec

    return BDSpec(b="k", d="k + 0.1*k^2", a=0.05, N=60)


@pytest.fixture
def models_dir():
    return FIXTURES_DIR / "models"
