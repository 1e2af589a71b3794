import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_blobs_1d():
    """Two far-apart 1D Gaussian blobs of 250 points each, with truth."""
    r = np.random.default_rng(7)
    X = np.concatenate([r.normal(-10, 1, 250), r.normal(10, 1, 250)]).reshape(-1, 1)
    y = np.repeat([0, 1], 250)
    return X, y


_ACCEPTANCE = []


@pytest.fixture
def record():
    """Log one acceptance line; the test still asserts on its own."""
    def _record(name, ok, detail=""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        return bool(ok)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
