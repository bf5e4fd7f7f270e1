"""Explicit rotation invariants of second- and third-order moments.

Invariants are built by realizing joint invariants of binary forms
("templates") on the standard bases of the irreducible submodules found in
:mod:`momentinv.sl2`, or on fixed Laplace eigenvectors for the rational
generating set.  Template bodies live in ``data/templates.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache
from importlib import resources
from math import comb, factorial, gcd, lcm
from typing import Iterable, Mapping, Sequence

from .gaussian import GaussianRational, as_gaussian
from .linalg import rank
from .poly import Polynomial, Variable, moment, parse_polynomial, template
from .sl2 import apply_derivation, lowest_weight_vectors, standard_basis

__all__ = [
    "InvariantTemplate",
    "Realization",
    "NamedInvariant",
    "UncoveredVariableError",
    "NotRealError",
    "degree_one_invariant",
    "realize",
    "normalize_real",
    "generate_invariants",
    "verify_annihilated",
    "jacobian_rank",
    "generator_count",
    "poincare_coefficients",
    "to_eta_names",
    "load_templates",
    "eigenvector_realization",
    "computed_realization",
    "JACOBIAN_VARIABLES",
    "reference_jacobian_point",
]


class UncoveredVariableError(KeyError):
    def __init__(self, variable: Variable):
        super().__init__(f"realization does not cover template variable {variable}")
        self.variable = variable

    def __str__(self):
        return self.args[0]


class NotRealError(ValueError):
    """The polynomial has no real scalar multiple."""


@dataclass(frozen=True)
class InvariantTemplate:
    name: str
    body: Polynomial
    source: str
    degree: int
    erratum: Polynomial | None = None

    @property
    def variables(self) -> list[Variable]:
        return self.body.variables()

    def corrected_body(self) -> Polynomial:
        return self.body if self.erratum is None else self.body + self.erratum

    def with_body(self, body: Polynomial) -> InvariantTemplate:
        return InvariantTemplate(self.name, body, self.source, self.degree, self.erratum)


@dataclass(frozen=True)
class Realization:
    map: Mapping[Variable, Polynomial]
    source: str  # "computed" or "paper-fixed"

    def __post_init__(self):
        for v, p in self.map.items():
            if not p.is_homogeneous_linear() or not all(w.is_moment for w in p.variables()):
                raise ValueError(f"image of {v} is not linear in moment variables")


@dataclass(frozen=True)
class NamedInvariant:
    name: str
    polynomial: Polynomial
    order: int
    degree: int
    source: str = ""

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "order": self.order,
            "degree": self.degree,
            "polynomial": to_eta_names(self.polynomial).to_json_obj(),
        }


# -- template data --------------------------------------------------------------


@cache
def _raw_data() -> dict:
    text = resources.files("momentinv").joinpath("data/templates.json").read_text()
    return json.loads(text)


def _template(entry: dict, source: str) -> InvariantTemplate:
    body = parse_polynomial(entry["body"])
    erratum = entry.get("erratum")
    return InvariantTemplate(
        entry["name"],
        body,
        source,
        entry.get("degree", body.degree()),
        parse_polynomial(erratum["add"]) if erratum else None,
    )


@cache
def load_templates() -> dict[str, list[InvariantTemplate]]:
    """Template families: ``binary_quartic``, ``joint_order3``, ``rational_order3``."""
    raw = _raw_data()
    return {
        "binary_quartic": [
            _template({"name": k, "body": v}, "binary-quartic") for k, v in raw["binary_quartic"].items()
        ],
        "joint_order3": [_template(e, "joint-table") for e in raw["joint_order3"]],
        "rational_order3": [_template(e, "rational-set") for e in raw["rational_order3"]],
    }


def eigenvector_realization() -> Realization:
    """The fixed Laplace eigenvectors ``e0..e5``, ``c1..c3``, ``b1..b7``."""
    out = {}
    for name, coeffs in _raw_data()["eigenvectors"].items():
        out[parse_polynomial(name).variables()[0]] = Polynomial.linear(
            {Variable.from_name("a_" + k): c for k, c in coeffs.items()}
        )
    return Realization(out, "paper-fixed")


JACOBIAN_VARIABLES: tuple[Variable, ...] = tuple(
    [template("e", i) for i in range(6)] + [template("c", i) for i in range(1, 4)] + [template("b", i) for i in range(1, 8)]
)


def reference_jacobian_point() -> dict[Variable, int]:
    raw = _raw_data()["jacobian_point"]
    return {parse_polynomial(k).variables()[0]: v for k, v in raw.items()}


@cache
def computed_realization(orders: tuple[int, ...], families: tuple[tuple[str, int], ...]) -> Realization:
    """Standard bases of the irreducible submodules, one template family per order ``s``.

    Every listed order must occur with multiplicity one.
    """
    out = {}
    for family, s in families:
        vecs = lowest_weight_vectors(orders, s)
        if len(vecs) != 1:
            raise ValueError(f"module of order {s} has multiplicity {len(vecs)}, expected 1")
        for k, vk in enumerate(standard_basis(vecs[0], s)):
            out[template(family, k)] = vk
    return Realization(out, "computed")


# -- basic invariant operations -------------------------------------------------------


def degree_one_invariant(d: int) -> NamedInvariant:
    """The degree-one invariant of even order ``d``: sum of multinomial-weighted ``a_{2j,2k,2l}``."""
    if d % 2:
        raise ValueError("no degree-one invariant exists for odd order")
    if not 2 <= d <= 16:
        raise ValueError("order must satisfy 2 <= d <= 16")
    m = d // 2
    coeffs = {}
    for j in range(m + 1):
        for k in range(m - j + 1):
            l = m - j - k
            coeffs[moment(2 * j, 2 * k, 2 * l)] = factorial(m) // (factorial(j) * factorial(k) * factorial(l))
    return NamedInvariant(f"I_{d}", Polynomial.linear(coeffs), d, 1, "degree-one")


def realize(t: InvariantTemplate | Polynomial, r: Realization | Mapping[Variable, Polynomial]) -> Polynomial:
    body = t.corrected_body() if isinstance(t, InvariantTemplate) else t
    mapping = r.map if isinstance(r, Realization) else r
    for v in body.variables():
        if v not in mapping:
            raise UncoveredVariableError(v)
    return body.subst(mapping)


def normalize_real(p: Polynomial) -> Polynomial:
    """Scale ``p`` to a primitive integer polynomial with positive leading coefficient.

    Raises NotRealError when no complex scalar multiple of ``p`` is real.
    """
    if p.is_zero():
        raise ValueError("cannot normalize the zero polynomial")
    q = p.scale(p.leading_coefficient().inverse())
    if not q.is_real():
        raise NotRealError("not proportional to a real polynomial")
    coeffs = [c.re for _, c in q.items()]
    den = lcm(*(c.denominator for c in coeffs))
    num = gcd(*(c.numerator for c in coeffs))
    return q.scale(Fraction(den, num))


def verify_annihilated(p: Polynomial) -> bool:
    """True iff E1, E2 and E3 all send ``p`` to the zero polynomial."""
    return all(apply_derivation(n, p).is_zero() for n in ("E1", "E2", "E3"))


def to_eta_names(p: Polynomial) -> Polynomial:
    return p.rename(lambda v: v.renamed("eta") if v.is_moment else v)


def _named(name: str, poly: Polynomial, source: str) -> NamedInvariant:
    return NamedInvariant(name, poly, poly.max_moment_order(), poly.degree(), source)


# -- invariant sets --------------------------------------------------------------------

ORDER3_FAMILIES = (("v", 0), ("x", 2), ("y", 4), ("u", 6))


def _order2_polynomial() -> list[NamedInvariant]:
    i1 = lowest_weight_vectors((2,), 0)[0]
    r = computed_realization((2,), (("a", 4),))
    s1, s2 = load_templates()["binary_quartic"]
    return [
        _named("I1", normalize_real(i1), "computed"),
        _named("I2", normalize_real(realize(s1, r)), "computed"),
        _named("I3", normalize_real(realize(s2, r)), "computed"),
    ]


def _order3_polynomial() -> list[NamedInvariant]:
    r = computed_realization((2, 3), ORDER3_FAMILIES)
    out = [_named(t.name, normalize_real(realize(t, r)), "computed") for t in load_templates()["joint_order3"]]
    return sorted(out, key=lambda n: (n.degree, n.name))


def _order3_rational(templates: Sequence[InvariantTemplate] | None = None) -> list[NamedInvariant]:
    r = eigenvector_realization()
    out = []
    for t in templates if templates is not None else load_templates()["rational_order3"]:
        p = realize(t, r)
        normalize_real(p)
        out.append(_named(t.name, p, "paper-fixed"))
    return out


@cache
def _generate_cached(order: int, kind: str) -> tuple[NamedInvariant, ...]:
    if order == 2:
        return tuple(_order2_polynomial())
    if kind == "polynomial":
        return tuple(_order3_polynomial())
    return tuple(_order3_rational())


def generate_invariants(order: int, kind: str = "polynomial") -> list[NamedInvariant]:
    """Generating invariants for moments of order up to 2 or 3.

    ``kind`` is ``"polynomial"`` or ``"rational"``; for order 2 both sets are
    ``I1, I2, I3``.
    """
    if order not in (2, 3):
        raise ValueError("symbolic generation supported for orders 2 and 3")
    if kind not in ("polynomial", "rational"):
        raise ValueError(f"unknown invariant set {kind!r}")
    return list(_generate_cached(order, kind))


def cross_set_proportionality() -> list[tuple[str, str, GaussianRational]]:
    """Pairs (polynomial-set name, rational-set name, scalar) that are proportional."""
    from .poly import poly_proportional

    out = []
    for p in generate_invariants(3, "polynomial"):
        for q in generate_invariants(3, "rational"):
            lam = poly_proportional(p.polynomial, q.polynomial)
            if lam is not None:
                out.append((p.name, q.name, lam))
    return out


# -- independence and counting ------------------------------------------------------------


def jacobian_rank(invs: Sequence[Polynomial | NamedInvariant], point: Mapping[Variable, object]) -> int:
    """Exact rank of the Jacobian of ``invs`` w.r.t. the variables of ``point``, evaluated there."""
    variables = sorted(point)
    values = {v: as_gaussian(Fraction(x) if not isinstance(x, GaussianRational) else x) for v, x in point.items()}
    rows = []
    for inv in invs:
        p = inv.polynomial if isinstance(inv, NamedInvariant) else inv
        rows.append([p.diff(v).evaluate_exact(values) for v in variables])
    return rank(rows)


def rational_template_bodies() -> list[Polynomial]:
    """The thirteen rational generators as polynomials in the eigenvector coordinates."""
    return [t.corrected_body() for t in load_templates()["rational_order3"]]


def generator_count(d: int) -> int:
    """Size of a minimal generating set of rational invariants of orders 2..d."""
    if d < 2:
        raise ValueError("order must be >= 2")
    return comb(d + 3, 3) - 7


def poincare_coefficients(max_degree: int, module_orders: Iterable[int] = (0, 2, 4, 6)) -> list[int]:
    """Dimensions of the degree-n invariants for n = 0..max_degree.

    Counts monomials in the weight vectors of the given irreducible modules
    (weights ``-s, -s+2, ..., s``) and takes weight-0 minus weight-2 counts.
    """
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    weights = [w for s in module_orders for w in range(-s, s + 1, 2)]
    # table[n][w] = number of degree-n monomials of total weight w, kept for |w| <= 2
    reach = max(module_orders) * max_degree if weights else 0
    offset = reach
    table = [[0] * (2 * reach + 1) for _ in range(max_degree + 1)]
    table[0][offset] = 1
    for w in weights:
        # unbounded knapsack in the variable of weight w
        for n in range(1, max_degree + 1):
            prev, row = table[n - 1], table[n]
            for idx in range(2 * reach + 1):
                src = idx - w
                if 0 <= src <= 2 * reach and prev[src]:
                    row[idx] += prev[src]
    return [table[n][offset] - table[n][offset + 2] if reach >= 2 else table[n][offset] for n in range(max_degree + 1)]
