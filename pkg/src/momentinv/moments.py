"""Raw, central and scale-normalized geometric moments of 3D data.

Point clouds are atomic measures, so their moments are exact weighted power
sums (up to float rounding). Voxel grids use the midpoint rule and are only
an approximation of the underlying density.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import kernels
from .poly import Polynomial, Variable, moment

__all__ = [
    "PointCloud",
    "VoxelGrid",
    "MomentTensor",
    "MomentParseError",
    "DomainError",
    "raw_moments",
    "central_moments",
    "normalized_moments",
    "evaluate_invariant",
    "evaluate_many",
    "read_point_cloud_csv",
    "read_voxel_json",
    "load_data",
    "sample_cloud",
]

Triple = tuple[int, int, int]


class MomentParseError(ValueError):
    """Malformed input file; the message carries the line or byte position."""


class DomainError(ValueError):
    """Input outside the mathematical domain (empty data, non-positive mass)."""


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (n, 3)
    weights: np.ndarray  # (n,)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        w = np.ones(len(pts)) if self.weights is None else np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(w) != len(pts):
            raise ValueError("weights and points differ in length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_points(cls, points, weights=None) -> PointCloud:
        return cls(np.asarray(points, dtype=np.float64), weights)

    def __len__(self) -> int:
        return len(self.points)

    def is_degenerate(self, rel_tol: float = 1e-9) -> bool:
        """True when the points span less than three dimensions (collinear, coplanar)."""
        if len(self.points) < 4:
            return True
        centered = self.points - self.points.mean(axis=0)
        sv = np.linalg.svd(centered, compute_uv=False)
        return bool(sv[-1] <= rel_tol * max(sv[0], 1e-300))


@dataclass(frozen=True)
class VoxelGrid:
    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]  # center of voxel (0, 0, 0)
    values: np.ndarray  # x-fastest, length nx*ny*nz

    def __post_init__(self):
        if len(self.dims) != 3 or any(int(d) <= 0 for d in self.dims):
            raise ValueError("dims must be three positive integers")
        if len(self.spacing) != 3 or any(not s > 0 for s in self.spacing):
            raise ValueError("spacing must be three positive numbers")
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if len(vals) != int(np.prod(self.dims)):
            raise ValueError(f"expected {int(np.prod(self.dims))} values, got {len(vals)}")
        object.__setattr__(self, "values", vals)

    def as_point_cloud(self) -> PointCloud:
        nx, ny, nz = self.dims
        # values are x-fastest, so index = i + nx*(j + ny*k)
        k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
        centers = np.stack([i.ravel(), j.ravel(), k.ravel()], axis=1) * np.asarray(self.spacing) + np.asarray(self.origin)
        return PointCloud(centers, self.values * float(np.prod(self.spacing)))


@dataclass(frozen=True)
class MomentTensor:
    kind: str  # raw | central | normalized
    max_order: int
    entries: Mapping[Triple, float] = field(repr=False)
    # low-order parts of raw double-double sums; the exact value is entry + residual
    residuals: Mapping[Triple, float] | None = field(default=None, repr=False, compare=False)

    def __getitem__(self, key: Triple) -> float:
        return self.entries[key]

    def order_max_norm(self, order: int) -> float:
        return max((abs(v) for k, v in self.entries.items() if sum(k) == order), default=0.0)

    def assignment(self, symbol: str = "a") -> dict[Variable, float]:
        return {moment(*k, symbol=symbol): v for k, v in self.entries.items() if sum(k) >= 2}

    def to_json_obj(self) -> dict:
        return {
            "kind": self.kind,
            "max_order": self.max_order,
            "entries": {f"{p}_{q}_{r}": float(v) for (p, q, r), v in sorted(self.entries.items(), key=_entry_key)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2)

    @classmethod
    def from_json_obj(cls, obj: dict) -> MomentTensor:
        entries = {tuple(int(x) for x in k.split("_")): float(v) for k, v in obj["entries"].items()}
        return cls(obj["kind"], int(obj["max_order"]), entries)


def _entry_key(item) -> tuple:
    (p, q, r), _ = item
    return (p + q + r, -p, -q)


def _check_order(max_order: int) -> None:
    if max_order < 2:
        raise ValueError("max_order must be >= 2")


def raw_moments(data: PointCloud | VoxelGrid, max_order: int) -> MomentTensor:
    """Weighted power sums (point cloud) or midpoint-rule integrals (voxel grid)."""
    _check_order(max_order)
    cloud = data.as_point_cloud() if isinstance(data, VoxelGrid) else data
    if len(cloud) == 0:
        raise DomainError("empty data")
    hi, lo = kernels.power_sums(cloud.points, cloud.weights, max_order)
    keys = [tuple(int(x) for x in e) for e in kernels.monomial_exponents(max_order)]
    return MomentTensor(
        "raw",
        max_order,
        {k: float(h) for k, h in zip(keys, hi)},
        {k: float(l) for k, l in zip(keys, lo)},
    )


def central_moments(raw: MomentTensor) -> MomentTensor:
    """Moments about the centroid via the binomial shift of the raw tensor.

    The shift runs in exact rational arithmetic on the double-double raw sums
    and is rounded once per entry, so cancellation against a distant centroid
    costs no accuracy beyond that of the raw sums themselves.
    """
    if raw.kind != "raw":
        raise ValueError(f"expected a raw tensor, got {raw.kind}")
    res = raw.residuals or {}
    m = {k: Fraction(v) + Fraction(res.get(k, 0.0)) for k, v in raw.entries.items()}
    mass = m[(0, 0, 0)]
    if not mass > 0:
        raise DomainError("non-positive total mass")
    shift = (-m[(1, 0, 0)] / mass, -m[(0, 1, 0)] / mass, -m[(0, 0, 1)] / mass)
    pw = [[s**k for k in range(raw.max_order + 1)] for s in shift]
    out = {}
    for (p, q, r) in raw.entries:
        acc = Fraction(0)
        for a in range(p + 1):
            ca = comb(p, a) * pw[0][p - a]
            for b in range(q + 1):
                cb = ca * comb(q, b) * pw[1][q - b]
                for c in range(r + 1):
                    acc += cb * comb(r, c) * pw[2][r - c] * m[(a, b, c)]
        out[(p, q, r)] = float(acc)
    return MomentTensor("central", raw.max_order, out)


def normalized_moments(central: MomentTensor) -> MomentTensor:
    """``eta_pqr = mu_pqr / mu_000^(1 + (p+q+r)/3)`` for orders >= 2."""
    if central.kind != "central":
        raise ValueError(f"expected a central tensor, got {central.kind}")
    mass = central.entries[(0, 0, 0)]
    if not mass > 0:
        raise DomainError("non-positive total mass")
    out = {k: v / mass ** (1 + sum(k) / 3) for k, v in central.entries.items() if sum(k) >= 2}
    return MomentTensor("normalized", central.max_order, out)


def normalized_from_data(data: PointCloud | VoxelGrid, max_order: int) -> MomentTensor:
    return normalized_moments(central_moments(raw_moments(data, max_order)))


# -- invariant evaluation -------------------------------------------------------------


@dataclass(frozen=True)
class CompiledPolynomial:
    variables: tuple[Variable, ...]
    coeff_re: np.ndarray
    coeff_im: np.ndarray
    exponents: np.ndarray

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> CompiledPolynomial:
        variables = tuple(p.variables())
        for v in variables:
            if not v.is_moment:
                raise ValueError(f"cannot evaluate template variable {v} on moments")
        index = {v: i for i, v in enumerate(variables)}
        exps = np.zeros((len(p), len(variables)), dtype=np.intp)
        re = np.empty(len(p))
        im = np.empty(len(p))
        for t, (mono, c) in enumerate(p.items()):
            for v, e in mono:
                exps[t, index[v]] = e
            re[t], im[t] = float(c.re), float(c.im)
        return cls(variables, re, im, exps)

    def __call__(self, tensors: Iterable[MomentTensor]) -> np.ndarray:
        tensors = list(tensors)
        keys = [v.index for v in self.variables]
        values = np.array([[t.entries[k] for k in keys] for t in tensors], dtype=np.float64).reshape(len(tensors), len(keys))
        return kernels.eval_monomials(self.coeff_re, self.coeff_im, self.exponents, values)


_compiled_cache: dict[Polynomial, CompiledPolynomial] = {}


def _compile(p: Polynomial) -> CompiledPolynomial:
    c = _compiled_cache.get(p)
    if c is None:
        c = _compiled_cache[p] = CompiledPolynomial.from_polynomial(p)
    return c


def _real_part(z: complex, name: str) -> float:
    if abs(z.imag) >= 1e-12 * (1 + abs(z.real)):
        raise ArithmeticError(f"invariant {name} evaluated to a non-real value {z}")
    return float(z.real)


def evaluate_many(inv, tensors: Iterable[MomentTensor]) -> np.ndarray:
    """Evaluate one invariant on a batch of normalized tensors."""
    poly = inv.polynomial if hasattr(inv, "polynomial") else inv
    name = getattr(inv, "name", "polynomial")
    tensors = list(tensors)
    need = poly.max_moment_order() if len(poly) else 0
    for t in tensors:
        if t.max_order < need:
            raise ValueError(f"{name} needs moments up to order {need}, tensor has {t.max_order}")
    values = _compile(poly)(tensors)
    return np.array([_real_part(z, name) for z in values])


def evaluate_invariant(inv, eta: MomentTensor) -> float:
    """Value of an invariant polynomial with each ``a_jkl`` replaced by ``eta_jkl``."""
    return float(evaluate_many(inv, [eta])[0])


# -- file formats -----------------------------------------------------------------------


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MomentParseError(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise MomentParseError(f"{where}: non-finite value {text!r}")
    return value


def read_point_cloud_csv(source: str | Path | io.TextIOBase) -> PointCloud:
    """Read ``x,y,z[,w]`` CSV with a header row; a missing ``w`` column means unit weights."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_point_cloud_csv(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        raise MomentParseError("line 1: missing header")
    cols = [h.strip() for h in header]
    if cols not in (["x", "y", "z"], ["x", "y", "z", "w"]):
        raise MomentParseError(f"line 1: header must be x,y,z or x,y,z,w, got {','.join(cols)}")
    pts, ws = [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(cols):
            raise MomentParseError(f"line {line}: expected {len(cols)} fields, got {len(row)}")
        vals = [_parse_float(c, f"line {line}") for c in row]
        pts.append(vals[:3])
        ws.append(vals[3] if len(vals) == 4 else 1.0)
    return PointCloud(np.asarray(pts, dtype=np.float64).reshape(-1, 3), np.asarray(ws, dtype=np.float64))


def read_voxel_json(source: str | Path | io.TextIOBase) -> VoxelGrid:
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return read_voxel_json(fh)
    text = source.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MomentParseError(f"line {exc.lineno}, byte {exc.pos}: {exc.msg}") from None
    try:
        grid = VoxelGrid(
            tuple(int(d) for d in obj["dims"]),
            tuple(float(s) for s in obj["spacing"]),
            tuple(float(o) for o in obj.get("origin", (0.0, 0.0, 0.0))),
            np.asarray(obj["values"], dtype=np.float64),
        )
    except KeyError as exc:
        raise MomentParseError(f"missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise MomentParseError(str(exc)) from None
    if not np.all(np.isfinite(grid.values)):
        raise MomentParseError("values contain non-finite entries")
    return grid


def load_data(path: str | Path) -> PointCloud | VoxelGrid:
    """Dispatch on extension: ``.csv`` point cloud, ``.json`` voxel grid."""
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return read_point_cloud_csv(path)
    if suffix == ".json":
        return read_voxel_json(path)
    raise MomentParseError(f"unrecognized input extension {suffix!r} (expected .csv or .json)")


def sample_cloud() -> PointCloud:
    """The bundled 50-point cloud used by the verification defaults."""
    from importlib import resources

    with resources.files("momentinv").joinpath("data/sample_cloud.csv").open() as fh:
        return read_point_cloud_csv(fh)
