"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 usage error, 3 parse error,
4 domain error (empty data, non-positive mass).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import invariants as inv
from .moments import (
    DomainError,
    MomentParseError,
    central_moments,
    evaluate_invariant,
    load_data,
    normalized_moments,
    raw_moments,
    sample_cloud,
)
from .sl2 import decompose

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TI_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"TI_SEED must be an integer, got {env!r}") from None


def _invariant_set(order: int, kind: str) -> list[inv.NamedInvariant]:
    if order not in (2, 3):
        raise UsageError("symbolic generation supported for orders 2 and 3")
    return inv.generate_invariants(order, kind)


def _load(path: str | None):
    return sample_cloud() if path is None else load_data(path)


def _eta(data, max_order: int):
    return normalized_moments(central_moments(raw_moments(data, max_order)))


# -- commands ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    invs = _invariant_set(args.order, args.set)
    if args.format == "json":
        print(json.dumps([i.to_json_obj() for i in invs], indent=2))
    else:
        for i in invs:
            print(f"{i.name} (degree {i.degree}): {inv.to_eta_names(i.polynomial).pretty()}")
    return EXIT_OK


def cmd_moments(args) -> int:
    if args.max_order < 2:
        raise UsageError("--max-order must be >= 2")
    tensor = raw_moments(_load(args.input), args.max_order)
    if args.kind in ("central", "normalized"):
        tensor = central_moments(tensor)
    if args.kind == "normalized":
        tensor = normalized_moments(tensor)
    print(tensor.to_json())
    return EXIT_OK


def cmd_eval(args) -> int:
    invs = _invariant_set(args.order, args.set)
    eta = _eta(_load(args.input), max(i.order for i in invs))
    print(json.dumps({i.name: evaluate_invariant(i, eta) for i in invs}, indent=2))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import eta_probe, invariance_report

    if args.rotations < 1:
        raise UsageError("--rotations must be >= 1")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    data = _load(args.input)
    if not hasattr(data, "points"):
        raise UsageError("verify needs a point cloud (.csv); voxel grids cannot be rotated exactly")
    invs = (
        inv.generate_invariants(2)
        + inv.generate_invariants(3, "polynomial")
        + inv.generate_invariants(3, "rational")
    )
    report = invariance_report(data, invs, args.rotations, args.tol, _seed(args), controls=[eta_probe(2, 0, 0)])
    print(report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_count(args) -> int:
    if args.order < 2:
        raise UsageError("--order must be >= 2")
    if args.poincare is not None:
        if args.order != 3:
            raise UsageError("--poincare is available for --order 3 only")
        if args.poincare < 0:
            raise UsageError("--poincare must be >= 0")
        print(" ".join(str(c) for c in inv.poincare_coefficients(args.poincare)))
    else:
        print(inv.generator_count(args.order))
    return EXIT_OK


def _random_point(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return {
        v: Fraction(int(rng.integers(-1000, 1001)), int(rng.integers(1, 101)))
        for v in inv.JACOBIAN_VARIABLES
    }


def cmd_independence(args) -> int:
    point = inv.reference_jacobian_point() if args.point == "paper" else _random_point(_seed(args))
    rank = inv.jacobian_rank(inv.rational_template_bodies(), point)
    print(rank)
    print("point: " + ", ".join(f"{v}={point[v]}" for v in inv.JACOBIAN_VARIABLES))
    return EXIT_OK


def _parse_orders(text: str) -> list[int]:
    try:
        orders = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"--orders must be a comma-separated list of integers, got {text!r}") from None
    if not orders or min(orders) < 2:
        raise UsageError("orders must be >= 2")
    return orders


def cmd_decompose(args) -> int:
    dec = decompose(_parse_orders(args.orders))
    if args.format == "json":
        print(
            json.dumps(
                {
                    "orders": list(dec.orders),
                    "modules": [
                        {"order": s, "multiplicity": m, "lowest_weight": [z.to_json_obj() for z in vecs]}
                        for s, (m, vecs) in sorted(dec.entries.items())
                    ],
                },
                indent=2,
            )
        )
        return EXIT_OK
    print(dec.describe())
    for s, (_, vecs) in sorted(dec.entries.items()):
        for z in vecs:
            print(f"V{s}: {z.pretty()}")
    return EXIT_OK


def cmd_self_check(args) -> int:
    from .verify import run_self_check

    report = run_self_check(_parse_orders(args.orders))
    if args.format == "json":
        print(json.dumps(report.to_json_obj(), indent=2))
    else:
        for r in report.results:
            line = f"{'PASS' if r.passed else 'FAIL'} {r.name}"
            if r.detail:
                line += f": {r.detail}"
            if r.counterexample:
                line += f" [counterexample: {r.counterexample}]"
            print(line)
        print(f"{sum(r.passed for r in report.results)}/{len(report.results)} checks passed")
    return EXIT_OK if report.passed else EXIT_FAIL


# -- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="momentinv", description="3D geometric moment invariants")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="print an invariant set")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--set", choices=["polynomial", "rational"], default="polynomial")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("moments", help="moment tensor of a .csv cloud or .json voxel grid")
    p.add_argument("--input", required=True)
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--kind", choices=["raw", "central", "normalized"], default="normalized")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("eval", help="evaluate an invariant set on data")
    p.add_argument("--input", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--set", choices=["polynomial", "rational"], default="polynomial")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="randomized similarity-invariance check")
    p.add_argument("--input", help="point-cloud CSV (default: bundled 50-point sample)")
    p.add_argument("--rotations", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("count", help="generator count or Poincare coefficients")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--poincare", type=int, metavar="N")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("independence", help="Jacobian rank of the rational order-3 set")
    p.add_argument("--point", choices=["paper", "random"], default="paper")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_independence)

    p = sub.add_parser("decompose", help="irreducible decomposition of moment spaces")
    p.add_argument("--orders", required=True, help="comma-separated, e.g. 2,3,4")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("self-check", help="run every exact symbolic check")
    p.add_argument("--orders", default="2,3")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.set_defaults(func=cmd_self_check)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MomentParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE if isinstance(exc, OSError) else EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
