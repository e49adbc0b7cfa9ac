import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from delibmatch.exactnum import (
    Q3, SQRT3, canonical_params, format_scalar, parse_scalar, q3_sign, simplify, tau, to_float,
)

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=40)
q3s = st.builds(Q3, rationals, rationals)


def test_square_of_w_star():
    w = SQRT3 - 1
    assert w * w == Q3(4, -2)


def test_lambda_times_w():
    lam, w = canonical_params()
    assert lam * w == Q3(-3, 2)


def test_inverse_by_conjugate():
    assert 1 / (1 + SQRT3) == Q3(Fraction(-1, 2), Fraction(1, 2))


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Q3(1, 1) / Q3(0, 0)


@pytest.mark.parametrize("x, s", [(Q3(0, 0), 0), (Q3(2, -1), 1), (Q3(5, -3), -1), (Q3(-2, 1), -1),
                                  (Q3(-5, 3), 1), (Q3(0, -1), -1), (Q3(3, 0), 1)])
def test_sign(x, s):
    assert q3_sign(x) == s


def test_canonical_params():
    lam, w = canonical_params()
    assert lam == Q3(Fraction(3, 2), Fraction(-1, 2))
    assert w == Q3(-1, 1)
    assert to_float(lam) == pytest.approx(0.633974, abs=1e-6)
    assert to_float(w) == pytest.approx(0.732051, abs=1e-6)
    assert lam + (1 - lam) == 1


def test_tau_at_lambda_star_is_w_star():
    lam, w = canonical_params()
    assert tau(lam) == w


def test_mixed_operands():
    assert Q3(1, 1) + Fraction(1, 2) == Q3(Fraction(3, 2), 1)
    assert 2 - Q3(1, 1) == Q3(1, -1)
    assert Q3(2, 0) == 2 and hash(Q3(2, 0)) == hash(Fraction(2))
    assert Q3(1, 1) > 2 and Q3(1, 1) < 3


def test_simplify_demotes_rationals():
    assert isinstance(simplify(Q3(3, 0)), Fraction)
    assert simplify(SQRT3) is SQRT3


@pytest.mark.parametrize("text, value", [
    ("3/2", Fraction(3, 2)),
    ("0.25", Fraction(1, 4)),
    ("-1+1√3", Q3(-1, 1)),
    ("3/2-1/2√3", Q3(Fraction(3, 2), Fraction(-1, 2))),
    ("√3", SQRT3),
    ("-sqrt3", -SQRT3),
    ("lambda*", canonical_params()[0]),
    ("w*", canonical_params()[1]),
])
def test_parse(text, value):
    assert parse_scalar(text) == value


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_scalar("1+x√3")
    with pytest.raises(ValueError):
        parse_scalar("")


@given(q3s)
def test_format_roundtrip(x):
    assert parse_scalar(format_scalar(x)) == x


@settings(max_examples=300)
@given(q3s, q3s, q3s)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x
    if x:
        assert x * x.inverse() == 1


@settings(max_examples=300)
@given(q3s)
def test_float_agrees_with_exact_sign(x):
    f = to_float(x)
    if abs(f) > 1e-9:
        assert math.copysign(1, f) == q3_sign(x)


@given(q3s, q3s)
def test_order_is_total_and_consistent(x, y):
    assert (x < y) + (x == y) + (x > y) == 1
    assert (x < y) == (q3_sign(y - x) > 0)
