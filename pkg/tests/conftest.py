import numpy as np
import pytest

from obsvol import SynthConfig, gen_market

ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[crit]
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def small_market():
    return gen_market(SynthConfig(n_stocks=20, n_days=1500, seed=7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
