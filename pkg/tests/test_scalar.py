from fractions import Fraction

import pytest
from flint import fmpq_poly
from hypothesis import given, settings
from hypothesis import strategies as st

from qtetra.errors import DivisionByZero
from qtetra.scalar import ONE, Q, ZERO, QRat, pochhammer, q_power, qq_pochhammer_inv

coeffs = st.lists(st.integers(-4, 4), min_size=1, max_size=4)


def rat(num, den):
    return QRat.from_fraction(fmpq_poly(num), fmpq_poly(den))


@st.composite
def qrats(draw):
    num = draw(coeffs)
    den = draw(coeffs.filter(lambda c: any(c)))
    return rat(num, den)


def test_canonical_form_is_reduced_and_monic():
    # (q^2 - 1) / (2q - 2) = (q + 1) / 2
    x = rat([-1, 0, 1], [-2, 2])
    assert x == (Q + 1) * QRat(Fraction(1, 2))
    assert x.den.coeffs()[-1] == 1
    assert x.num.gcd(x.den) == 1


def test_equal_values_hash_equal():
    a = rat([0, 2], [0, 0, 4])  # 2q / 4q^2
    b = rat([1], [0, 2])  # 1 / 2q
    assert a == b and hash(a) == hash(b)


def test_rendering():
    assert str((1 - Q * Q).inv()) == "1/(1 - q^2)"
    assert str(ZERO) == "0"
    assert str(QRat("3/4")) == "3/4"


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        ZERO.inv()
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_q_power():
    assert q_power(3) == Q * Q * Q
    assert q_power(-2) * q_power(2) == ONE
    assert q_power(0) == ONE


def test_pochhammer_values():
    q2 = q_power(2)
    assert pochhammer(q2, q2, 0) == ONE
    assert pochhammer(q2, q2, 2) == (1 - q2) * (1 - q2 * q2)
    assert qq_pochhammer_inv(3) * pochhammer(q2, q2, 3) == ONE


@settings(max_examples=60, deadline=None)
@given(qrats(), qrats(), qrats())
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO
    if not a.is_zero():
        assert a * a.inv() == ONE
        assert (b / a) * a == b


@settings(max_examples=40, deadline=None)
@given(qrats(), st.integers(-3, 3))
def test_times_q_power(a, k):
    assert a.times_q_power(k) == a * q_power(k)


@settings(max_examples=40, deadline=None)
@given(st.fractions(max_denominator=20))
def test_rational_constants_match_fraction(f):
    x = QRat(f)
    assert x == QRat(str(f))
    assert (x + x) == QRat(2 * f)
