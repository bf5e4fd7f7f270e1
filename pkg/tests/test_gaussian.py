from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from momentinv.gaussian import I, ONE, ZERO, GaussianRational, as_gaussian, format_fraction, parse_fraction

fractions = st.builds(Fraction, st.integers(-(10**6), 10**6), st.integers(1, 50))
gaussians = st.builds(GaussianRational, fractions, fractions)


def test_canonical_lowest_terms():
    z = GaussianRational(Fraction(4, -6), Fraction(10, 5))
    assert (z.re.numerator, z.re.denominator) == (-2, 3)
    assert z.im == 2
    assert z == GaussianRational(Fraction(-2, 3), 2)
    assert hash(z) == hash(GaussianRational(Fraction(-2, 3), 2))


def test_real_values_hash_like_fractions():
    assert hash(GaussianRational(Fraction(1, 3))) == hash(Fraction(1, 3))
    assert GaussianRational(3) == 3


def test_i_squared():
    assert I * I == -ONE
    assert (2 + I) + (1 - I) == 3


def test_immutable():
    with pytest.raises(AttributeError):
        ONE.re = Fraction(2)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


@pytest.mark.parametrize("text,value", [("3/4", Fraction(3, 4)), ("-7", Fraction(-7)), (" 10/4 ", Fraction(5, 2))])
def test_parse_fraction(text, value):
    assert parse_fraction(text) == value


@pytest.mark.parametrize("text", ["", "1/0", "a/b", "1.5"])
def test_parse_fraction_rejects(text):
    with pytest.raises(ValueError):
        parse_fraction(text)


def test_format_always_has_denominator():
    assert format_fraction(Fraction(5)) == "5/1"


def test_as_gaussian_rejects_floats():
    assert as_gaussian(0.5) is NotImplemented


@given(gaussians, gaussians, gaussians)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    if b:
        assert (a / b) * b == a


@given(gaussians)
def test_conjugate_and_norm(z):
    assert z.conjugate().conjugate() == z
    assert z * z.conjugate() == z.norm()


@given(gaussians)
def test_json_round_trip(z):
    assert GaussianRational.from_json(z.to_json()) == z


@given(gaussians, st.integers(-4, 4))
def test_integer_powers(z, n):
    if not z and n < 0:
        return
    expected = ONE
    for _ in range(abs(n)):
        expected = expected * z
    assert z**n == (expected if n >= 0 else expected.inverse())


@given(gaussians)
def test_complex_conversion(z):
    assert complex(z) == complex(float(z.re), float(z.im))
