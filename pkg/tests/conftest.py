import math

import pytest

from biphoton import BiphotonState, EntanglementParams
from biphoton.oracle import build_covariance

# reference interferometer settings: delta_t = 0.4 ps, Delta_t = 10 ps
CODING_DT = 0.4e-12
CODING_DT_PULSE = 10e-12


@pytest.fixture(scope="session")
def state10():
    """Ratio 10 with one photon per party on average."""
    return BiphotonState.calibrated(1.0, EntanglementParams.from_ratio(10.0))


@pytest.fixture(scope="session")
def state10_n2():
    return BiphotonState.calibrated(2.0, EntanglementParams.from_ratio(10.0))


@pytest.fixture(scope="session")
def state10_weak():
    return BiphotonState.calibrated(0.1, EntanglementParams.from_ratio(10.0))


@pytest.fixture(scope="session")
def coding_state():
    return BiphotonState.calibrated(1.0, EntanglementParams(CODING_DT, CODING_DT_PULSE))


@pytest.fixture(scope="session")
def cov10(state10):
    return build_covariance(state10)


@pytest.fixture(scope="session")
def cov10_weak(state10_weak):
    return build_covariance(state10_weak)


@pytest.fixture(scope="session")
def joint10(state10):
    from biphoton.pgf import Interval, pgf_large_joint
    return pgf_large_joint(state10, Interval(-math.inf, math.inf))


def pytest_terminal_summary(terminalreporter):
    """Print one PASS/FAIL line per acceptance criterion that ran."""
    try:
        from test_acceptance import RESULTS
    except ImportError:  # pragma: no cover
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(RESULTS, key=lambda s: (int(s.split()[0].rstrip("abc")), s)):
        ok, detail = RESULTS[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {label}: {detail}")
