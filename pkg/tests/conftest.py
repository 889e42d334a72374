import numpy as np
import pytest

from awnn.matrix import MaskedMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def masked(rows):
    """Build a MaskedMatrix from nested lists with None for missing cells."""
    X = np.array([[np.nan if x is None else x for x in r] for r in rows], dtype=float)
    return MaskedMatrix.from_array(X)


_CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record a pass/fail line for one acceptance criterion.

    Call ``criterion(number, ok, detail)``; the line is printed immediately
    and again in the terminal summary. The test then fails if ``ok`` is false.
    """
    def report(number, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
