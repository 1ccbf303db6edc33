import numpy as np
import pytest
from hypothesis import settings, strategies as st

from phenowarp.series import Series

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def make_series(values, days=None, step=1.0, start=0.0):
    values = np.asarray(values, dtype=float)
    if days is None:
        days = start + step * np.arange(values.size)
    return Series(days, values)


@st.composite
def value_lists(draw, min_size=2, max_size=8, lo=0.0, hi=1.0):
    n = draw(st.integers(min_size, max_size))
    return draw(
        st.lists(
            st.floats(lo, hi, allow_nan=False, allow_infinity=False, width=64),
            min_size=n,
            max_size=n,
        )
    )


@st.composite
def series_pairs(draw, min_size=2, max_size=8):
    """Two series on daily grids starting at day 0 (lengths may differ)."""
    a = draw(value_lists(min_size, max_size))
    b = draw(value_lists(min_size, max_size))
    return make_series(a), make_series(b)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(results.items()):
            terminalreporter.write_line(line)
