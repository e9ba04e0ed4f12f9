import numpy as np
import pytest

from wgqed.device import load_device


@pytest.fixture(scope="session")
def ref_device():
    return load_device()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_spec(n, rng, scale=2 * np.pi * 1e3):
    """Random two-local target with entries uniform in +-scale."""
    from wgqed.compiler import SpinNetworkSpec

    iu = np.triu(np.ones((n, n)), 1)
    J = rng.uniform(-scale, scale, size=(3, 3, n, n)) * iu
    h = rng.uniform(-scale, scale, size=(3, n))
    return SpinNetworkSpec(n, J, h)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {detail}"
        ACCEPTANCE.setdefault(number, []).append((ok, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for number in sorted(ACCEPTANCE):
        for _, line in ACCEPTANCE[number]:
            terminalreporter.write_line(line)
