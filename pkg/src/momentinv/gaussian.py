"""Exact Gaussian rationals ``a + b*i`` with ``a, b`` in Q."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["GaussianRational", "I", "ZERO", "ONE", "as_gaussian", "parse_fraction", "format_fraction"]


def parse_fraction(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` (decimal integers only)."""
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        value = Fraction(int(num), int(den) if sep else 1)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc
    return value


def format_fraction(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class GaussianRational:
    """Immutable complex number with exact rational real and imaginary parts.

    ``Fraction`` keeps both parts in lowest terms with a positive denominator,
    so equal values have identical representations and hashes.
    """

    __slots__ = ("re", "im")

    re: Fraction
    im: Fraction

    def __init__(self, re: Rational | int | str = 0, im: Rational | int | str = 0):
        object.__setattr__(self, "re", re if type(re) is Fraction else Fraction(re))
        object.__setattr__(self, "im", im if type(im) is Fraction else Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> GaussianRational:
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    # -- predicates ---------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return not self.im

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __mul__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b:
            if not d:
                return GaussianRational._raw(a * c, d)
            return GaussianRational._raw(a * c, a * d)
        if not d:
            return GaussianRational._raw(a * c, b * c)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> GaussianRational:
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational._raw(self.re / norm, -self.im / norm)

    def conjugate(self) -> GaussianRational:
        return GaussianRational._raw(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # -- comparison / conversion -------------------------------------------
    def __eq__(self, other):
        other = as_gaussian(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return _imag_str(self.im)
        sign = "-" if self.im < 0 else "+"
        return f"({self.re} {sign} {_imag_str(abs(self.im))})"

    def to_json(self) -> dict:
        return {"re": format_fraction(self.re), "im": format_fraction(self.im)}

    @classmethod
    def from_json(cls, obj: dict) -> GaussianRational:
        return cls(parse_fraction(obj["re"]), parse_fraction(obj.get("im", "0/1")))


def _imag_str(value: Fraction) -> str:
    if value == 1:
        return "I"
    if value == -1:
        return "-I"
    return f"{value}*I"


def as_gaussian(value) -> GaussianRational:
    """Coerce ints, Fractions and exact complex-with-integer-parts; else NotImplemented."""
    if type(value) is GaussianRational:
        return value
    if isinstance(value, (int, Fraction)):
        return GaussianRational._raw(Fraction(value), Fraction(0))
    if isinstance(value, Rational):
        return GaussianRational(value)
    return NotImplemented


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)
