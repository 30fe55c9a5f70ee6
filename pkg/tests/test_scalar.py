import math
from fractions import Fraction as Q

import pytest
from hypothesis import given

from qharness.scalar import Surd, close, is_exact, is_zero, parse_scalar, sign, sqrt, squared, surd, to_jsonable

from conftest import positive_rationals, rationals


def test_sqrt_of_square_is_rational():
    assert sqrt(Q(9, 4)) == Q(3, 2)
    assert isinstance(sqrt(Q(9, 4)), Q)


def test_sqrt_of_nonsquare_is_surd():
    r = sqrt(Q(2))
    assert isinstance(r, Surd)
    assert r * r == 2
    assert math.isclose(float(r), math.sqrt(2))


def test_float_sqrt_stays_float():
    assert sqrt(2.0) == math.sqrt(2.0)


@given(positive_rationals(), positive_rationals())
def test_surd_product_and_quotient(a, b):
    x, y = sqrt(a), sqrt(b)
    assert squared(x * y) == a * b
    assert squared(x / y) == a / b


@given(rationals(), positive_rationals())
def test_surd_sign_and_ordering(c, r):
    x = surd(c, r)
    assert sign(x) == sign(c)
    assert (x > 0) == (c > 0)
    assert -x == surd(-c, r)


def test_commensurable_sums():
    x = surd(1, 2) + surd(3, 2)
    assert x == surd(4, 2)
    with pytest.raises(TypeError):
        surd(1, 2) + surd(1, 3)


def test_is_exact_and_tolerances():
    assert is_exact(Q(1, 3)) and is_exact(3) and is_exact(surd(1, 2))
    assert not is_exact(0.5)
    assert is_zero(1e-13) and not is_zero(Q(1, 10**20))
    assert close(0.1 + 0.2, 0.3)


def test_parse_scalar_modes():
    assert parse_scalar("1/3", "rational") == Q(1, 3)
    assert parse_scalar(0.5, "rational") == Q(1, 2)
    assert parse_scalar("inf", "rational") == math.inf
    assert parse_scalar("1/4", "float") == 0.25


def test_to_jsonable():
    assert to_jsonable(Q(1, 2)) == "1/2"
    assert to_jsonable(math.inf) == "inf"
    assert to_jsonable(-0.0) == 0.0 and math.copysign(1, to_jsonable(-0.0)) == 1
