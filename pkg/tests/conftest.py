import numpy as np
import pytest

from sgsim import SimParams, drift_time, exact_records, free_drift
from sgsim.observables import RunPair

REFERENCE = dict(A=0.5, S=4.0, z0=4.0)


@pytest.fixture(scope="session")
def ref_params():
    return SimParams(**REFERENCE)


@pytest.fixture(scope="session")
def ref_records(ref_params):
    """Exact m0 = +1/2 and -1/2 runs at the reference point, t = 1, no drift."""
    return exact_records(ref_params, drift=False)


@pytest.fixture(scope="session")
def ref_pair(ref_records):
    plus, minus = ref_records
    return RunPair(plus.final_grid, minus.final_grid)


@pytest.fixture(scope="session")
def ref_drifted(ref_params, ref_pair):
    td = drift_time(ref_params)
    return RunPair(free_drift(ref_pair.plus, td, ref_params), free_drift(ref_pair.minus, td, ref_params))


@pytest.fixture
def rng():
    return np.random.default_rng(20241018)


def random_coeffs(rng, n, support=None):
    support = n if support is None else support
    a = np.zeros((n, n), complex)
    b = np.zeros((n, n), complex)
    a[:support, :support] = rng.normal(size=(support, support)) + 1j * rng.normal(size=(support, support))
    b[:support, :support] = rng.normal(size=(support, support)) + 1j * rng.normal(size=(support, support))
    # damp high levels so the state is smooth on the grid
    k = np.arange(n)
    envelope = np.exp(-0.15 * (k[:, None] + k[None, :]))
    a *= envelope
    b *= envelope
    norm = np.sqrt(np.sum(abs(a) ** 2) + np.sum(abs(b) ** 2))
    return a / norm, b / norm


ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
