"""The so3 / sl2 derivations on moment variables and module decomposition.

The rotation generators act on a single moment variable by

    E1(a_jkl) = k a_{j+1,k-1,l} - j a_{j-1,k+1,l}
    E2(a_jkl) = l a_{j+1,k,l-1} - j a_{j-1,k,l+1}
    E3(a_jkl) = l a_{j,k+1,l-1} - k a_{j,k-1,l+1}

and extend to polynomials by the Leibniz rule.  The sl2 triple is
``Dplus = i E1 + E2``, ``Dminus = i E1 - E2``, ``H = 2i E3``, and the Casimir
("Laplace") operator is ``Dplus Dminus + Dminus Dplus + H^2 / 2``, which acts
on an irreducible module of order ``s`` as the scalar ``s (s + 2) / 2``.
With these definitions it equals ``-2 (E1^2 + E2^2 + E3^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cache
from math import factorial
from typing import Callable, Iterable, Sequence

from .gaussian import ONE, ZERO, GaussianRational, I
from .linalg import nullspace, rank
from .poly import Polynomial, Variable, moment

__all__ = [
    "DERIVATIONS",
    "OPERATORS",
    "TemplateVariableError",
    "InternalConsistencyError",
    "basis_variables",
    "apply_derivation",
    "operator_matrix",
    "check_commutators",
    "lowest_weight_sign",
    "lowest_weight_vectors",
    "standard_basis",
    "ModuleDecomposition",
    "decompose",
    "closed_form_multiplicities",
    "laplace_eigenvalue",
    "laplace_eigenbasis",
    "in_span",
]

DERIVATIONS = ("E1", "E2", "E3", "Dplus", "Dminus", "H")
OPERATORS = DERIVATIONS + ("Laplace",)

HALF = GaussianRational(Fraction(1, 2))


class TemplateVariableError(ValueError):
    """Derivations are only defined on moment variables."""


class InternalConsistencyError(RuntimeError):
    """Empirical and closed-form results disagree."""


def normalize_orders(orders: Iterable[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(int(o) for o in orders)))
    if not out:
        raise ValueError("order set must be nonempty")
    if out[0] < 2:
        raise ValueError("moment orders must be >= 2")
    return out


def basis_variables(orders: Iterable[int], symbol: str = "a") -> list[Variable]:
    """All moment variables of the given orders, in canonical variable order."""
    out = []
    for d in normalize_orders(orders):
        out.extend(moment(j, k, d - j - k, symbol) for j in range(d + 1) for k in range(d - j + 1))
    return sorted(out)


# -- generator action on single variables --------------------------------------


def _shift(v: Variable, dj: int, dk: int, dl: int) -> Variable:
    j, k, l = v.index
    return moment(j + dj, k + dk, l + dl, v.name)


@cache
def _generator_image(name: str, v: Variable) -> dict[Variable, GaussianRational]:
    if not v.is_moment:
        raise TemplateVariableError(f"derivation {name} is undefined on template variable {v}")
    j, k, l = v.index
    img: dict[Variable, GaussianRational] = {}

    def put(coeff: int, target: Callable[[], Variable]):
        # a zero coefficient is exactly the case where the target index would be negative
        if coeff:
            t = target()
            img[t] = img.get(t, ZERO) + coeff

    if name == "E1":
        put(k, lambda: _shift(v, 1, -1, 0))
        put(-j, lambda: _shift(v, -1, 1, 0))
    elif name == "E2":
        put(l, lambda: _shift(v, 1, 0, -1))
        put(-j, lambda: _shift(v, -1, 0, 1))
    elif name == "E3":
        put(l, lambda: _shift(v, 0, 1, -1))
        put(-k, lambda: _shift(v, 0, -1, 1))
    else:
        combos = {
            "Dplus": ((I, "E1"), (ONE, "E2")),
            "Dminus": ((I, "E1"), (-ONE, "E2")),
            "H": ((2 * I, "E3"),),
        }[name]
        for c, gen in combos:
            for t, x in _generator_image(gen, v).items():
                img[t] = img.get(t, ZERO) + c * x
    return {t: c for t, c in img.items() if c}


def _derive(name: str, p: Polynomial) -> Polynomial:
    acc: dict = {}
    for mono, c in p.items():
        for i, (v, e) in enumerate(mono):
            image = _generator_image(name, v)
            if not image:
                continue
            rest = dict(mono[:i] + mono[i + 1 :])
            if e > 1:
                rest[v] = e - 1
            ce = c * e
            for t, x in image.items():
                m = dict(rest)
                m[t] = m.get(t, 0) + 1
                key = tuple(sorted(m.items()))
                acc[key] = acc.get(key, ZERO) + ce * x
    return Polynomial(acc)


def apply_derivation(name: str, p: Polynomial) -> Polynomial:
    """Apply one of E1, E2, E3, Dplus, Dminus, H or the Laplace operator."""
    for v in p.variables():
        if not v.is_moment:
            raise TemplateVariableError(f"derivation {name} is undefined on template variable {v}")
    if name == "Laplace":
        pm = _derive("Dminus", p)
        pp = _derive("Dplus", p)
        ph = _derive("H", p)
        return _derive("Dplus", pm) + _derive("Dminus", pp) + _derive("H", ph).scale(HALF)
    if name not in DERIVATIONS:
        raise ValueError(f"unknown operator {name!r}")
    return _derive(name, p)


def compose(*names: str) -> Callable[[Polynomial], Polynomial]:
    """``compose("A", "B")(p) == A(B(p))``."""

    def run(p: Polynomial) -> Polynomial:
        for n in reversed(names):
            p = apply_derivation(n, p)
        return p

    return run


def e_square_sum(p: Polynomial) -> Polynomial:
    return compose("E1", "E1")(p) + compose("E2", "E2")(p) + compose("E3", "E3")(p)


# -- linear forms as vectors ----------------------------------------------------


def to_vector(p: Polynomial, basis: Sequence[Variable]) -> list[GaussianRational]:
    coeffs = p.linear_coefficients()
    extra = set(coeffs) - set(basis)
    if extra:
        raise ValueError(f"linear form uses variables outside the basis: {sorted(extra)}")
    return [coeffs.get(v, ZERO) for v in basis]


def from_vector(vec: Sequence[GaussianRational], basis: Sequence[Variable]) -> Polynomial:
    return Polynomial.linear({v: c for v, c in zip(basis, vec) if c})


def operator_matrix(name: str, basis: Sequence[Variable]) -> list[list[GaussianRational]]:
    """Matrix ``M`` with ``op(basis[j]) = sum_i M[i][j] basis[i]``."""
    index = {v: i for i, v in enumerate(basis)}
    n = len(basis)
    m = [[ZERO] * n for _ in range(n)]
    for j, v in enumerate(basis):
        for t, c in apply_derivation(name, Polynomial.var(v)).linear_coefficients().items():
            m[index[t]][j] = c
    return m


# -- commutator checks ----------------------------------------------------------


@dataclass
class RelationResult:
    name: str
    passed: bool
    counterexample: str | None = None


@dataclass
class CommutatorReport:
    orders: tuple[int, ...]
    results: list[RelationResult]
    so3_sign: int | None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def as_dict(self) -> dict[str, bool]:
        return {r.name: r.passed for r in self.results}


def _bracket(a: str, b: str, p: Polynomial) -> Polynomial:
    return apply_derivation(a, apply_derivation(b, p)) - apply_derivation(b, apply_derivation(a, p))


def check_commutators(orders: Iterable[int]) -> CommutatorReport:
    """Check the sl2 and so3 relations and Casimir identities on every basis variable.

    The so3 brackets are compared with ``sigma * ([e1,e2] = -e3, [e1,e3] = e2,
    [e2,e3] = -e1)``; the global sign ``sigma`` is read off the first variable
    on which ``[E1,E2]`` is nonzero and must then hold everywhere.
    """
    orders = normalize_orders(orders)
    basis = [Polynomial.var(v) for v in basis_variables(orders)]
    checks: list[tuple[str, Callable[[Polynomial], Polynomial]]] = [
        ("[H,Dplus]=2Dplus", lambda p: _bracket("H", "Dplus", p) - apply_derivation("Dplus", p).scale(2)),
        ("[H,Dminus]=-2Dminus", lambda p: _bracket("H", "Dminus", p) + apply_derivation("Dminus", p).scale(2)),
        ("[Dplus,Dminus]=H", lambda p: _bracket("Dplus", "Dminus", p) - apply_derivation("H", p)),
        ("Dplus=iE1+E2", lambda p: apply_derivation("Dplus", p) - apply_derivation("E1", p).scale(I) - apply_derivation("E2", p)),
        ("Dminus=iE1-E2", lambda p: apply_derivation("Dminus", p) - apply_derivation("E1", p).scale(I) + apply_derivation("E2", p)),
        ("H=2iE3", lambda p: apply_derivation("H", p) - apply_derivation("E3", p).scale(2 * I)),
        ("Laplace=-2(E1^2+E2^2+E3^2)", lambda p: apply_derivation("Laplace", p) + e_square_sum(p).scale(2)),
    ]
    for op in DERIVATIONS:
        checks.append((f"[Laplace,{op}]=0", lambda p, op=op: _bracket("Laplace", op, p)))

    results = []
    for name, fn in checks:
        bad = next((p for p in basis if not fn(p).is_zero()), None)
        results.append(RelationResult(name, bad is None, None if bad is None else str(bad)))

    sign = None
    for p in basis:
        b12 = _bracket("E1", "E2", p)
        e3 = apply_derivation("E3", p)
        if not b12.is_zero():
            sign = 1 if b12 == -e3 else (-1 if b12 == e3 else 0)
            break
    so3 = [
        ("[E1,E2]=-s*E3", "E1", "E2", "E3", -1),
        ("[E1,E3]=s*E2", "E1", "E3", "E2", 1),
        ("[E2,E3]=-s*E1", "E2", "E3", "E1", -1),
    ]
    for name, a, b, c, sgn in so3:
        if not sign:
            results.append(RelationResult(name, False, "no consistent so3 sign"))
            continue
        bad = next(
            (p for p in basis if _bracket(a, b, p) != apply_derivation(c, p).scale(sgn * sign)),
            None,
        )
        results.append(RelationResult(name, bad is None, None if bad is None else str(bad)))
    return CommutatorReport(orders, results, sign or None)


# -- lowest weight vectors --------------------------------------------------------

# Lowest weight vector of the order-4 module inside the order-2 moments.
_REFERENCE_V0 = Polynomial.linear(
    {moment(0, 1, 1): 2, moment(0, 0, 2): I, moment(0, 2, 0): -I}
)


@cache
def lowest_weight_sign() -> int:
    """Sign ``+1`` or ``-1`` with ``H(z) = sign * ord(z) * z`` for lowest weight vectors.

    Fixed once by applying H to the known order-4 lowest weight vector in the
    second-order moments.
    """
    hz = apply_derivation("H", _REFERENCE_V0)
    if hz == _REFERENCE_V0.scale(4):
        return 1
    if hz == _REFERENCE_V0.scale(-4):
        return -1
    raise InternalConsistencyError("reference vector is not an H-eigenvector with eigenvalue +-4")


def _blocks(orders: tuple[int, ...]) -> list[list[Variable]]:
    return [basis_variables([d]) for d in orders]


def dplus_order(z: Polynomial, limit: int) -> int | None:
    """Largest ``k`` with ``Dplus^k(z) != 0``, or None if not reached by ``limit``."""
    if z.is_zero():
        return None
    k, cur = 0, z
    while k <= limit:
        nxt = apply_derivation("Dplus", cur)
        if nxt.is_zero():
            return k
        k, cur = k + 1, nxt
    return None


def lowest_weight_vectors(orders: Iterable[int], s: int) -> list[Polynomial]:
    """Basis of lowest weight vectors of order ``s`` among linear forms.

    Solves ``Dminus(z) = 0`` and ``H(z) = sign * s * z`` exactly.  Each order
    block is solved separately (the operators preserve it); the combined basis
    is in reduced echelon form over the canonical variable order, so each
    vector has leading coefficient 1.
    """
    orders = normalize_orders(orders)
    if s < 0:
        return []
    lam = lowest_weight_sign() * s
    vectors: list[Polynomial] = []
    for block in _blocks(orders):
        n = len(block)
        dm = operator_matrix("Dminus", block)
        h = operator_matrix("H", block)
        for i in range(n):
            h[i][i] = h[i][i] - lam
        for vec in nullspace(dm + h, n):
            z = from_vector(vec, block)
            if dplus_order(z, s) != s:
                raise InternalConsistencyError(f"solution {z} does not have Dplus-order {s}")
            vectors.append(z)
    vectors.sort(key=lambda z: z.variables()[0])
    return vectors


def standard_basis(z: Polynomial, s: int) -> list[Polynomial]:
    """``v_k = (s-k)!/s! * Dplus^k(z)`` for ``k = 0..s``."""
    powers = [z]
    for _ in range(s + 1):
        powers.append(apply_derivation("Dplus", powers[-1]))
    if not powers[s + 1].is_zero() or (s > 0 and powers[s].is_zero()) or z.is_zero():
        raise ValueError(f"not a lowest weight vector of order {s}")
    return [powers[k].scale(Fraction(factorial(s - k), factorial(s))) for k in range(s + 1)]


# -- decomposition -------------------------------------------------------------------


def closed_form_multiplicities(d: int) -> dict[int, int]:
    """Multiplicity of the order-``2k`` irreducible in ``T_2 + ... + T_d``."""
    out = {}
    for k in range(d + 1):
        mult = (d - k) // 2 if k <= 1 else (d - k) // 2 + 1
        if mult:
            out[2 * k] = mult
    return out


def module_dimension(orders: Iterable[int]) -> int:
    return sum((d + 1) * (d + 2) // 2 for d in normalize_orders(orders))


@dataclass
class ModuleDecomposition:
    orders: tuple[int, ...]
    entries: dict[int, tuple[int, list[Polynomial]]] = field(default_factory=dict)

    def multiplicities(self) -> dict[int, int]:
        return {s: m for s, (m, _) in sorted(self.entries.items())}

    def dimension(self) -> int:
        return sum(m * (s + 1) for s, (m, _) in self.entries.items())

    def describe(self) -> str:
        return ", ".join(f"V{s} x{m}" for s, m in self.multiplicities().items())


def decompose(orders: Iterable[int]) -> ModuleDecomposition:
    orders = normalize_orders(orders)
    entries = {}
    for s in range(0, 2 * max(orders) + 1, 2):
        vecs = lowest_weight_vectors(orders, s)
        if vecs:
            entries[s] = (len(vecs), vecs)
    dec = ModuleDecomposition(orders, entries)
    if dec.dimension() != module_dimension(orders):
        raise InternalConsistencyError(
            f"decomposition {dec.describe()} has dimension {dec.dimension()}, "
            f"expected {module_dimension(orders)}"
        )
    if orders == tuple(range(2, orders[-1] + 1)):
        expected = closed_form_multiplicities(orders[-1])
        if dec.multiplicities() != expected:
            raise InternalConsistencyError(
                f"empirical multiplicities {dec.multiplicities()} != closed form {expected}"
            )
    return dec


# -- Laplace eigenspaces ------------------------------------------------------------------


def laplace_eigenvalue(s: int) -> Fraction:
    return Fraction(s * (s + 2), 2)


def laplace_eigenbasis(orders: Iterable[int]) -> dict[Fraction, list[Polynomial]]:
    """Exact eigenspaces of the Laplace operator on linear forms.

    Candidate eigenvalues are ``s(s+2)/2`` for even ``s`` up to twice the
    largest order; each eigenspace is the exact kernel of ``L - lam``.
    """
    orders = normalize_orders(orders)
    out: dict[Fraction, list[Polynomial]] = {}
    for s in range(0, 2 * max(orders) + 1, 2):
        lam = laplace_eigenvalue(s)
        vecs: list[Polynomial] = []
        for block in _blocks(orders):
            n = len(block)
            lm = operator_matrix("Laplace", block)
            for i in range(n):
                lm[i][i] = lm[i][i] - lam
            vecs.extend(from_vector(v, block) for v in nullspace(lm, n))
        if vecs:
            vecs.sort(key=lambda z: z.variables()[0])
            out[lam] = vecs
    return out


def in_span(p: Polynomial, vectors: Sequence[Polynomial]) -> bool:
    """Exact membership of a linear form in the span of ``vectors``."""
    basis = sorted({v for q in list(vectors) + [p] for v in q.variables()})
    rows = [to_vector(q, basis) for q in vectors]
    return rank(rows + [to_vector(p, basis)]) == rank(rows) if rows else p.is_zero()
