from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def rationals(lo=-5, hi=5, max_den=6):
    return st.builds(Fraction, st.integers(lo * max_den, hi * max_den), st.integers(1, max_den))


def positive_rationals(hi=5, max_den=6):
    return st.builds(Fraction, st.integers(1, hi * max_den), st.integers(1, max_den))


@pytest.fixture
def Q():
    return Fraction
