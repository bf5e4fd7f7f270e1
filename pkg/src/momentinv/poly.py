"""Sparse multivariate polynomials over the Gaussian rationals.

Variables are either moment symbols ``a_{j,k,l}`` (rendered ``eta`` once
evaluated on normalized moments) or template symbols such as ``e_3`` or
``u_6`` that stand for basis vectors of abstract modules.

Terms are kept in graded-lexicographic order: higher total degree first,
then lexicographic on exponent vectors with the smallest variable most
significant.  Moments sort by ``(j, k, l)`` and precede all template
variables; templates sort by family name, then index.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .gaussian import ONE, ZERO, GaussianRational, as_gaussian

__all__ = [
    "Variable",
    "moment",
    "template",
    "Polynomial",
    "poly_add",
    "poly_mul",
    "poly_diff",
    "poly_subst",
    "poly_conj",
    "poly_proportional",
    "poly_eval",
    "MissingVariableError",
    "parse_polynomial",
]

MOMENT_SYMBOLS = ("a", "eta")


@dataclass(frozen=True, slots=True)
class Variable:
    """A polynomial indeterminate.

    ``kind`` is ``"moment"`` or ``"template"``.  For moments ``name`` is the
    display symbol (``"a"`` or ``"eta"``) and ``index`` the exponent triple;
    for templates ``name`` is the family letter and ``index`` a 1-tuple.
    """

    kind: str
    name: str
    index: tuple[int, ...]
    sort_key: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind == "moment":
            key = (0, self.index, self.name)
        else:
            key = (1, self.name, self.index)
        object.__setattr__(self, "sort_key", key)

    def __lt__(self, other: Variable) -> bool:
        return self.sort_key < other.sort_key

    @property
    def is_moment(self) -> bool:
        return self.kind == "moment"

    @property
    def order(self) -> int:
        """Total order ``j + k + l`` of a moment variable."""
        if not self.is_moment:
            raise TypeError(f"{self} is not a moment variable")
        return sum(self.index)

    def renamed(self, symbol: str) -> Variable:
        return Variable(self.kind, symbol, self.index)

    def __str__(self) -> str:
        return f"{self.name}_" + "_".join(str(i) for i in self.index)

    __repr__ = __str__

    @classmethod
    def from_name(cls, text: str) -> Variable:
        """Inverse of ``str``: ``a_2_0_0``, ``eta_0_1_1``, ``e_3``."""
        parts = text.split("_")
        try:
            idx = tuple(int(p) for p in parts[1:])
        except ValueError:
            raise ValueError(f"malformed variable name {text!r}") from None
        if parts[0] in MOMENT_SYMBOLS and len(idx) == 3:
            return moment(*idx, symbol=parts[0])
        if len(idx) == 1 and parts[0].isalpha():
            return template(parts[0], idx[0])
        raise ValueError(f"malformed variable name {text!r}")


def moment(j: int, k: int, l: int, symbol: str = "a") -> Variable:
    if min(j, k, l) < 0:
        raise ValueError(f"negative moment index ({j},{k},{l})")
    return Variable("moment", symbol, (j, k, l))


def template(family: str, index: int) -> Variable:
    return Variable("template", family, (index,))


Monomial = tuple  # tuple[tuple[Variable, int], ...] sorted by variable


def _mono_key(mono: Monomial) -> tuple:
    deg = sum(e for _, e in mono)
    return (-deg, tuple((v.sort_key, -e) for v, e in mono))


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    exps = dict(m1)
    for v, e in m2:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


class MissingVariableError(KeyError):
    """Raised when a numeric evaluation is missing a variable value."""

    def __init__(self, variable: Variable):
        super().__init__(f"no value assigned to variable {variable}")
        self.variable = variable

    def __str__(self):
        return self.args[0]


class Polynomial:
    """Immutable sparse polynomial with exact Gaussian-rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | Iterable[tuple[Monomial, object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, GaussianRational] = {}
        for mono, coeff in items:
            c = as_gaussian(coeff)
            if c is NotImplemented:
                raise TypeError(f"unsupported coefficient {coeff!r}")
            mono = tuple(sorted((v, e) for v, e in mono if e))
            if any(e < 0 for _, e in mono):
                raise ValueError("negative exponent")
            prev = acc.get(mono)
            acc[mono] = c if prev is None else prev + c
        self._terms = {m: c for m, c in sorted(acc.items(), key=lambda t: _mono_key(t[0])) if c}
        self._hash = None

    @classmethod
    def _from_dict(cls, terms: dict[Monomial, GaussianRational]) -> Polynomial:
        obj = object.__new__(cls)
        obj._terms = {m: terms[m] for m in sorted(terms, key=_mono_key) if terms[m]}
        obj._hash = None
        return obj

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c) -> Polynomial:
        return cls({(): c})

    @classmethod
    def var(cls, v: Variable, coeff=1) -> Polynomial:
        return cls({((v, 1),): coeff})

    @classmethod
    def linear(cls, coeffs: Mapping[Variable, object]) -> Polynomial:
        return cls({((v, 1),): c for v, c in coeffs.items()})

    # -- inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, GaussianRational]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, GaussianRational]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def variables(self) -> list[Variable]:
        return sorted({v for m in self._terms for v, _ in m})

    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self._terms), default=0)

    def is_homogeneous_linear(self) -> bool:
        return all(len(m) == 1 and m[0][1] == 1 for m in self._terms)

    def linear_coefficients(self) -> dict[Variable, GaussianRational]:
        if not self.is_homogeneous_linear():
            raise ValueError("polynomial is not homogeneous linear")
        return {m[0][0]: c for m, c in self._terms.items()}

    def leading_coefficient(self) -> GaussianRational:
        for c in self._terms.values():
            return c
        return ZERO

    def coefficient(self, mono: Monomial) -> GaussianRational:
        return self._terms.get(tuple(sorted(mono)), ZERO)

    def is_real(self) -> bool:
        return all(not c.im for c in self._terms.values())

    def max_moment_order(self) -> int:
        return max((v.order for v in self.variables() if v.is_moment), default=0)

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self._terms)
        for m, c in other._terms.items():
            prev = acc.get(m)
            acc[m] = c if prev is None else prev + c
        return Polynomial._from_dict(acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._from_dict({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc: dict[Monomial, GaussianRational] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                c = c1 * c2
                prev = acc.get(m)
                acc[m] = c if prev is None else prev + c
        return Polynomial._from_dict(acc)

    __rmul__ = __mul__

    def scale(self, c) -> Polynomial:
        c = as_gaussian(c)
        return Polynomial._from_dict({m: v * c for m, v in self._terms.items()})

    def __pow__(self, n: int) -> Polynomial:
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result, base = Polynomial.constant(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- structural operations -----------------------------------------------
    def diff(self, v: Variable) -> Polynomial:
        acc: dict[Monomial, GaussianRational] = {}
        for m, c in self._terms.items():
            for i, (w, e) in enumerate(m):
                if w == v:
                    rest = m[:i] + (((w, e - 1),) if e > 1 else ()) + m[i + 1 :]
                    acc[rest] = acc.get(rest, ZERO) + c * e
                    break
        return Polynomial._from_dict(acc)

    def conj(self) -> Polynomial:
        return Polynomial._from_dict({m: c.conjugate() for m, c in self._terms.items()})

    def subst(self, mapping: Mapping[Variable, object]) -> Polynomial:
        images = {v: _coerce(p) for v, p in mapping.items()}
        power_cache: dict[tuple[Variable, int], Polynomial] = {}

        def power(v: Variable, e: int) -> Polynomial:
            key = (v, e)
            if key not in power_cache:
                power_cache[key] = images[v] if e == 1 else power(v, e - 1) * images[v]
            return power_cache[key]

        total: dict[Monomial, GaussianRational] = {}
        for m, c in self._terms.items():
            kept = tuple((v, e) for v, e in m if v not in images)
            term = Polynomial._from_dict({kept: c})
            for v, e in m:
                if v in images:
                    term = term * power(v, e)
            for tm, tc in term._terms.items():
                prev = total.get(tm)
                total[tm] = tc if prev is None else prev + tc
        return Polynomial._from_dict(total)

    def rename(self, fn) -> Polynomial:
        """Apply a variable renaming ``fn`` (must be injective on this polynomial)."""
        return Polynomial({tuple((fn(v), e) for v, e in m): c for m, c in self._terms.items()})

    def evaluate(self, assignment: Mapping[Variable, complex]) -> complex:
        total = 0j
        for m, c in self._terms.items():
            term = complex(c)
            for v, e in m:
                try:
                    x = assignment[v]
                except KeyError:
                    raise MissingVariableError(v) from None
                term *= x**e
            total += term
        return total

    def evaluate_exact(self, assignment: Mapping[Variable, object]) -> GaussianRational:
        total = ZERO
        for m, c in self._terms.items():
            term = c
            for v, e in m:
                try:
                    x = as_gaussian(assignment[v])
                except KeyError:
                    raise MissingVariableError(v) from None
                term = term * x**e
            total = total + term
        return total

    # -- serialization --------------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "terms": [
                {"coeff": c.to_json(), "monomial": {str(v): e for v, e in m}}
                for m, c in self._terms.items()
            ]
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> Polynomial:
        terms = []
        for t in obj["terms"]:
            mono = tuple((Variable.from_name(k), int(e)) for k, e in t["monomial"].items())
            terms.append((mono, GaussianRational.from_json(t["coeff"])))
        return cls(terms)

    @classmethod
    def from_json(cls, text: str) -> Polynomial:
        return cls.from_json_obj(json.loads(text))

    def pretty(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for i, (m, c) in enumerate(self._terms.items()):
            mono = "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in m)
            if c.is_real():
                sign = "-" if c.re < 0 else "+"
                mag = abs(c.re)
                coeff = "" if (mag == 1 and mono) else str(mag)
            else:
                sign, coeff = "+", str(c)
                if not c.re and c.im < 0:
                    sign, coeff = "-", str(-c)
            body = f"{coeff}*{mono}" if coeff and mono else (coeff or mono)
            if i == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    __str__ = pretty

    def __repr__(self):
        return f"Polynomial({self.pretty()!r})"


def _coerce(value):
    if isinstance(value, Polynomial):
        return value
    c = as_gaussian(value)
    if c is NotImplemented:
        return NotImplemented
    return Polynomial.constant(c)


# -- functional API -----------------------------------------------------------


def poly_add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def poly_diff(p: Polynomial, v: Variable) -> Polynomial:
    return p.diff(v)


def poly_subst(p: Polynomial, mapping: Mapping[Variable, object]) -> Polynomial:
    return p.subst(mapping)


def poly_conj(p: Polynomial) -> Polynomial:
    return p.conj()


def poly_proportional(p: Polynomial, q: Polynomial) -> GaussianRational | None:
    """Return ``lam`` with ``p == lam * q``, or None.  Two zero polynomials give 1."""
    if p.is_zero() and q.is_zero():
        return ONE
    if p.is_zero() or q.is_zero() or p._terms.keys() != q._terms.keys():
        return None
    lam = None
    for m, c in p._terms.items():
        ratio = c / q._terms[m]
        if lam is None:
            lam = ratio
        elif ratio != lam:
            return None
    return lam


def poly_eval(p: Polynomial, assignment: Mapping[Variable, complex]) -> complex:
    return p.evaluate(assignment)


# -- text parsing -----------------------------------------------------------------

_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")


def parse_polynomial(text: str, resolve=None) -> Polynomial:
    """Parse integer/rational-coefficient text like ``"3*e1^2 - e5*e2 + 2"``.

    ``resolve`` maps a bare token (``"e1"``, ``"a_2_0_0"``) to a Variable; the
    default accepts ``family+digits`` template names and canonical names.
    """
    resolve = resolve or _default_resolve
    terms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:]!r}")
        sign = -1 if m.group(1) == "-" else 1
        coeff = Fraction(sign)
        mono: dict[Variable, int] = {}
        for factor in m.group(2).strip().split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"empty factor in {m.group(0)!r}")
            base, _, exp = factor.partition("^")
            if base[0].isdigit():
                coeff *= Fraction(base) ** int(exp or 1)
                continue
            v = resolve(base)
            mono[v] = mono.get(v, 0) + int(exp or 1)
        terms.append((tuple(mono.items()), coeff))
        pos = m.end()
    return Polynomial(terms)


_TEMPLATE_RE = re.compile(r"^([A-Za-z]+?)(\d+)$")


def _default_resolve(token: str) -> Variable:
    if "_" in token:
        return Variable.from_name(token)
    m = _TEMPLATE_RE.match(token)
    if not m:
        raise ValueError(f"unrecognised variable token {token!r}")
    return template(m.group(1), int(m.group(2)))
