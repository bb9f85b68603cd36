from pathlib import Path

import numpy as np
import pytest

from relsens import distributions, limit_state, transform
from relsens.config import load_config
from relsens.harness import Model

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

LINEAR_A = (-0.8, -0.5, -0.3, -0.1, -0.1)

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE = {}


def linear_model(b=2.0, a=LINEAR_A):
    names = tuple(f"x{i + 1}" for i in range(len(a)))
    t = transform.build([distributions.normal(0.0, 1.0) for _ in a])
    return Model(t, limit_state.linear(b, a, names), names)


def bearing_model():
    return load_config(CONFIGS / "bearing.json").model


@pytest.fixture
def linear():
    return linear_model()


@pytest.fixture(scope="session")
def bearing():
    return bearing_model()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
