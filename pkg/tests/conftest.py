import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("pkg", deadline=None, max_examples=50, derandomize=True)
settings.load_profile("pkg")

_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record an acceptance outcome; the summary prints one line per criterion."""

    def record(number, ok, detail=""):
        _VERDICTS[number] = (bool(ok), detail)
        line = f"acceptance {number}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
