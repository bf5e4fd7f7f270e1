"""Numeric invariance harness and the exact self-check suite."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .invariants import (
    InvariantTemplate,
    NamedInvariant,
    computed_realization,
    degree_one_invariant,
    eigenvector_realization,
    generator_count,
    jacobian_rank,
    load_templates,
    reference_jacobian_point,
    poincare_coefficients,
    realize,
    verify_annihilated,
    ORDER3_FAMILIES,
)
from .moments import PointCloud, central_moments, evaluate_many, normalized_moments, raw_moments
from .poly import Polynomial, moment, poly_proportional
from .sl2 import (
    apply_derivation,
    check_commutators,
    closed_form_multiplicities,
    decompose,
    laplace_eigenbasis,
    laplace_eigenvalue,
    normalize_orders,
    standard_basis,
)

__all__ = [
    "random_rotation",
    "euler_rotation",
    "transform_cloud",
    "trial_rng",
    "InvarianceReport",
    "InvariantRecord",
    "invariance_report",
    "SelfCheckReport",
    "run_self_check",
    "eta_probe",
    "random_euler_rotation",
    "template_integrity",
]

DEFAULT_TOL = 1e-8
ABS_TOL = 1e-12
SMALL_BASELINE = 1e-9


# -- transforms -------------------------------------------------------------------------


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial; independent of how trials are scheduled."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform rotation from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_rotation(psi: float, theta: float, phi: float) -> np.ndarray:
    """Rz(phi) @ Ry(theta) @ Rz(psi), with Ry(theta) = [[c,0,-s],[0,1,0],[s,0,c]]."""
    c, s = math.cos(theta), math.sin(theta)
    ry = np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
    return _rot_z(phi) @ ry @ _rot_z(psi)


def random_euler_rotation(rng: np.random.Generator) -> np.ndarray:
    """Euler-angle alternative (not uniform on SO(3)); used for cross-checks."""
    psi, theta, phi = rng.uniform(0.0, 2 * math.pi, 3)
    return euler_rotation(psi, theta, phi)


def transform_cloud(c: PointCloud, rotation: np.ndarray, translation=(0.0, 0.0, 0.0), scale: float = 1.0) -> PointCloud:
    """Map every point p to ``scale * R p + t``.

    Weights are multiplied by ``scale**3`` so the cloud stays a sampling of the
    transported density, whose mass grows with volume; normalized moments are
    scale invariant only under that convention.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    r = np.asarray(rotation, dtype=np.float64)
    pts = scale * (c.points @ r.T) + np.asarray(translation, dtype=np.float64)
    return PointCloud(pts, c.weights * scale**3)


# -- invariance report -------------------------------------------------------------------


@dataclass
class InvariantRecord:
    name: str
    baseline: float
    max_abs_dev: float
    max_rel_dev: float
    passed: bool
    criterion: str  # "relative" or "absolute"

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "baseline": self.baseline,
            "max_abs_dev": self.max_abs_dev,
            "max_rel_dev": self.max_rel_dev,
            "criterion": self.criterion,
            "pass": self.passed,
        }


@dataclass
class InvarianceReport:
    seed: int
    trials: int
    tolerance: float
    abs_tolerance: float
    degenerate: bool
    records: list[InvariantRecord]
    controls: list[InvariantRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        # a control "passes" when the harness detects its non-invariance
        return all(r.passed for r in self.records) and all(r.passed for r in self.controls)

    def to_json_obj(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "tolerance": self.tolerance,
            "abs_tolerance": self.abs_tolerance,
            "degenerate": self.degenerate,
            "error_model": (
                "relative deviation |v - v0| / |v0| against tolerance; absolute deviation against "
                f"abs_tolerance when |v0| < {SMALL_BASELINE:g} or the cloud is degenerate; "
                "controls are non-invariants that must exceed the tolerance"
            ),
            "invariants": [r.to_json_obj() for r in self.records],
            "controls": [r.to_json_obj() for r in self.controls],
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)


def _trial_tensors(c: PointCloud, trials: int, seed: int, max_order: int):
    out = []
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        rot = random_rotation(rng)
        t = rng.uniform(-10.0, 10.0, 3)
        lam = rng.uniform(0.1, 10.0)
        moved = transform_cloud(c, rot, t, lam)
        out.append(normalized_moments(central_moments(raw_moments(moved, max_order))))
    return out


def _deviation(baseline: float, values: np.ndarray) -> tuple[float, float]:
    dev = np.abs(values - baseline)
    max_abs = float(dev.max()) if len(dev) else 0.0
    max_rel = max_abs / abs(baseline) if baseline else (math.inf if max_abs else 0.0)
    return max_abs, max_rel


def invariance_report(
    c: PointCloud,
    invs: Sequence[NamedInvariant],
    trials: int = 100,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    controls: Sequence[NamedInvariant] = (),
    abs_tol: float = ABS_TOL,
) -> InvarianceReport:
    """Evaluate invariants on ``c`` and on ``trials`` random similarity transforms of it."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    max_order = max([2] + [i.order for i in list(invs) + list(controls)])
    base = normalized_moments(central_moments(raw_moments(c, max_order)))
    moved = _trial_tensors(c, trials, seed, max_order)
    degenerate = c.is_degenerate()

    def record(inv: NamedInvariant, control: bool) -> InvariantRecord:
        v0 = float(evaluate_many(inv, [base])[0])
        max_abs, max_rel = _deviation(v0, evaluate_many(inv, moved))
        if degenerate or abs(v0) < SMALL_BASELINE:
            within, criterion = max_abs <= abs_tol, "absolute"
        else:
            within, criterion = max_rel <= tol, "relative"
        return InvariantRecord(inv.name, v0, max_abs, max_rel, (not within) if control else within, criterion)

    return InvarianceReport(
        seed,
        trials,
        tol,
        abs_tol,
        degenerate,
        [record(i, False) for i in invs],
        [record(i, True) for i in controls],
    )


def eta_probe(j: int, k: int, l: int) -> NamedInvariant:
    """A bare normalized moment: a non-invariant used as a negative control."""
    return NamedInvariant(f"eta_{j}_{k}_{l}", Polynomial.var(moment(j, k, l)), j + k + l, 1, "control")


# -- exact self-check ---------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: str | None = None


@dataclass
class SelfCheckReport:
    orders: tuple[int, ...]
    results: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_json_obj(self) -> dict:
        return {
            "orders": list(self.orders),
            "pass": self.passed,
            "checks": [asdict(r) for r in self.results],
        }


def _module_relations(z: Polynomial, s: int) -> Polynomial | None:
    """First broken standard-module relation as a counterexample, else None."""
    basis = standard_basis(z, s)
    for k, vk in enumerate(basis):
        down = apply_derivation("Dminus", vk)
        expected = basis[k - 1].scale(k) if k else Polynomial()
        if down != expected:
            return down - expected
        up = apply_derivation("Dplus", vk)
        expected = basis[k + 1].scale(s - k) if k < s else Polynomial()
        if up != expected:
            return up - expected
    return None


def template_integrity(t: InvariantTemplate) -> str | None:
    """Integer coefficients, content gcd 1, positive leading coefficient; else a reason."""
    body = t.corrected_body()
    coeffs = [c for _, c in body.items()]
    if not coeffs:
        return "empty body"
    if any(c.im or c.re.denominator != 1 for c in coeffs):
        return "non-integer coefficient"
    if math.gcd(*(int(c.re) for c in coeffs)) != 1:
        return "coefficients share a common factor"
    if body.leading_coefficient().re < 0:
        return "negative leading coefficient"
    return None


def _first_nonzero_derivation(p: Polynomial) -> Polynomial | None:
    for name in ("E1", "E2", "E3"):
        image = apply_derivation(name, p)
        if not image.is_zero():
            return image
    return None


def _check_template_family(
    family: str, templates: Sequence[InvariantTemplate], realization, results: list[CheckResult]
) -> dict[str, Polynomial]:
    realized = {}
    for t in templates:
        reason = template_integrity(t)
        results.append(CheckResult(f"template-integrity:{t.name}", reason is None, reason or ""))
        p = realize(t, realization)
        realized[t.name] = p
        bad = _first_nonzero_derivation(p)
        results.append(
            CheckResult(
                f"annihilation:{t.name}",
                bad is None,
                f"{family} template realized in moment variables",
                None if bad is None else bad.pretty(),
            )
        )
    return realized


def run_self_check(
    orders: Iterable[int] = (2, 3),
    templates: Mapping[str, Sequence[InvariantTemplate]] | None = None,
    invariant_sets: bool = True,
) -> SelfCheckReport:
    """Run every exact check; failures become report entries with counterexamples.

    ``templates`` replaces the bundled template families (used to confirm
    that corrupted templates are caught).
    """
    orders = normalize_orders(orders)
    results: list[CheckResult] = []

    comm = check_commutators(orders)
    for r in comm.results:
        results.append(CheckResult(f"operator:{r.name}", r.passed, "", r.counterexample))

    dec = decompose(orders)
    mults = dec.multiplicities()
    results.append(CheckResult("decomposition", True, dec.describe()))
    if orders == tuple(range(2, max(orders) + 1)):
        closed = closed_form_multiplicities(max(orders))
        results.append(CheckResult("decomposition:closed-form", closed == mults, f"closed form {closed}"))
    for s, (_, vecs) in sorted(dec.entries.items()):
        for z in vecs:
            bad = _module_relations(z, s)
            results.append(
                CheckResult(f"standard-module:V{s}", bad is None, "", None if bad is None else bad.pretty())
            )

    eig = laplace_eigenbasis(orders)
    expected = {}
    for s, m in mults.items():
        expected[laplace_eigenvalue(s)] = expected.get(laplace_eigenvalue(s), 0) + m * (s + 1)
    got = {lam: len(v) for lam, v in eig.items()}
    results.append(CheckResult("laplace-eigenspaces", got == expected, f"{ {str(k): v for k, v in got.items()} }"))

    if invariant_sets:
        _invariant_checks(orders, templates or load_templates(), results)
    return SelfCheckReport(orders, results)


def _invariant_checks(orders: tuple[int, ...], templates, results: list[CheckResult]) -> None:
    for d in range(2, 17, 2):
        inv = degree_one_invariant(d)
        results.append(CheckResult(f"annihilation:I_{d}", verify_annihilated(inv.polynomial)))
    i2 = degree_one_invariant(2).polynomial

    if 2 in orders:
        _check_template_family(
            "binary quartic", templates["binary_quartic"], computed_realization((2,), (("a", 4),)), results
        )
    if {2, 3} <= set(orders):
        joint = _check_template_family(
            "joint", templates["joint_order3"], computed_realization((2, 3), ORDER3_FAMILIES), results
        )
        if "B0" in joint:
            lam = poly_proportional(joint["B0"], i2)
            results.append(CheckResult("degree-one:B0", lam is not None, "B0 proportional to a_002 + a_020 + a_200"))
        rational = _check_template_family("rational", templates["rational_order3"], eigenvector_realization(), results)
        if "od" in rational:
            results.append(CheckResult("degree-one:od", rational["od"] == i2, "od equals a_002 + a_020 + a_200"))
        _mutation_sensitivity(templates, results)

        bodies = [t.corrected_body() for t in templates["rational_order3"]]
        r = jacobian_rank(bodies, reference_jacobian_point())
        results.append(CheckResult("jacobian-rank", r == 13, f"rank {r} at the reference point"))
        coeffs = poincare_coefficients(9)
        results.append(
            CheckResult(
                "poincare", coeffs == [1, 1, 4, 8, 26, 53, 146, 305, 704, 1417], " ".join(map(str, coeffs))
            )
        )
        counts = [generator_count(d) for d in (2, 3, 4)]
        results.append(CheckResult("generator-count", counts == [3, 13, 28], f"{counts}"))


def _mutation_sensitivity(templates, results: list[CheckResult]) -> None:
    """Every single-coefficient change of a multi-term template must break annihilation.

    By linearity a change of the coefficient of monomial m goes undetected
    exactly when the realization of m alone is an invariant; single-term
    templates are guarded by the integrity check instead.
    """
    families = (
        ("joint_order3", computed_realization((2, 3), ORDER3_FAMILIES)),
        ("rational_order3", eigenvector_realization()),
    )
    for family, realization in families:
        for t in templates[family]:
            body = t.corrected_body()
            if len(body) < 2:
                continue
            blind = [
                mono
                for mono, _ in body.items()
                if verify_annihilated(realize(Polynomial({mono: 1}), realization))
            ]
            results.append(
                CheckResult(
                    f"mutation-sensitivity:{t.name}",
                    not blind,
                    "",
                    None if not blind else str(Polynomial({blind[0]: 1}).pretty()),
                )
            )
