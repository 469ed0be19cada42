import numpy as np
import pytest

from fockwit import kernels
from fockwit.fock import CutoffSpec, PureState, embed


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.BACKEND
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


def random_vector(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def headroom_state(seed, d=6, n_modes=3, room=2):
    """Random state whose support stays ``room`` levels below the cutoff."""
    rng = np.random.default_rng(seed)
    small = CutoffSpec((d - room,) * n_modes)
    return embed(PureState(small, random_vector(rng, small.total_dim)), room)


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.failed:
        _acceptance[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        mark = "PASS" if _acceptance[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name}")
