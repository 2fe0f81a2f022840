import numpy as np
import pytest


class ScriptedRng:
    """Stand-in generator returning fixed values, for noiseless and forced-support cases."""

    def __init__(self, uniform=None, normal=None, base_seed=0):
        self._uniform = uniform
        self._normal = normal
        self._rng = np.random.default_rng(base_seed)

    def random(self, size=None):
        if self._uniform is None:
            return self._rng.random(size)
        return np.full(size, self._uniform, dtype=float)

    def standard_normal(self, size=None):
        if self._normal is None:
            return self._rng.standard_normal(size)
        if callable(self._normal):
            return self._normal(size)
        return np.full(size, self._normal, dtype=float)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one verdict line per acceptance criterion for the terminal summary."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(line)
