import pytest

from repelling.kernels import KernelPair
from repelling.manifolds import TorusModel, bolza

ACCEPTANCE_LINES = []


def record(line):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def circle():
    return TorusModel((1.0,))


@pytest.fixture(scope="session")
def square():
    return TorusModel((1.0, 1.0))


@pytest.fixture(scope="session")
def surface():
    return bolza()


@pytest.fixture(scope="session")
def k1():
    return KernelPair(0.05, dim=1)


@pytest.fixture(scope="session")
def k2():
    return KernelPair(0.05, dim=2)
