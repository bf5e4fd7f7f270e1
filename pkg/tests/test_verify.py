import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentinv.invariants import generate_invariants, load_templates
from momentinv.moments import PointCloud, evaluate_invariant, normalized_from_data, sample_cloud
from momentinv.poly import Polynomial
from momentinv.verify import (
    euler_rotation,
    eta_probe,
    invariance_report,
    random_euler_rotation,
    random_rotation,
    run_self_check,
    transform_cloud,
    trial_rng,
)


def assert_rotation(r):
    assert np.max(np.abs(r.T @ r - np.eye(3))) < 1e-12
    assert abs(np.linalg.det(r) - 1) < 1e-12


class TestRotations:
    @given(st.integers(0, 2**63 - 1), st.integers(0, 1000))
    @settings(max_examples=200)
    def test_quaternion_rotation_is_orthogonal(self, seed, trial):
        assert_rotation(random_rotation(trial_rng(seed, trial)))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=100)
    def test_euler_rotation_is_orthogonal(self, seed):
        assert_rotation(random_euler_rotation(np.random.default_rng(seed)))

    def test_deterministic(self):
        a = random_rotation(trial_rng(42, 0))
        b = random_rotation(trial_rng(42, 0))
        assert a.tobytes() == b.tobytes()
        assert not np.array_equal(a, random_rotation(trial_rng(42, 1)))

    def test_euler_convention(self):
        # a pure z-rotation by psi + phi when theta = 0
        assert np.allclose(euler_rotation(0.3, 0.0, 0.4), euler_rotation(0.7, 0.0, 0.0), atol=1e-15)
        ry = euler_rotation(0.0, math.pi / 2, 0.0)
        assert np.allclose(ry @ [1, 0, 0], [0, 0, 1], atol=1e-15)

    def test_quaternion_sampling_is_uniform(self):
        # the image of a fixed axis is uniform on the sphere: mean ~ 0, second moment ~ I/3
        vs = np.array([random_rotation(trial_rng(7, t)) @ [0, 0, 1] for t in range(4000)])
        assert np.all(np.abs(vs.mean(axis=0)) < 0.05)
        assert np.allclose(vs.T @ vs / len(vs), np.eye(3) / 3, atol=0.03)


class TestTransformCloud:
    cloud = PointCloud.from_points([(1, 0, 0), (0, 2, 0), (0, 0, 3), (1, 1, 1)], [1, 2, 3, 4])

    def test_identity(self):
        out = transform_cloud(self.cloud, np.eye(3))
        assert np.array_equal(out.points, self.cloud.points)
        assert np.array_equal(out.weights, self.cloud.weights)

    def test_quarter_turn(self):
        rz = euler_rotation(math.pi / 2, 0.0, 0.0)
        out = transform_cloud(PointCloud.from_points([(1, 0, 0)]), rz)
        assert np.max(np.abs(out.points[0] - [0, 1, 0])) < 1e-15

    def test_composition(self):
        r1 = random_rotation(trial_rng(1, 0))
        r2 = random_rotation(trial_rng(1, 1))
        twice = transform_cloud(transform_cloud(self.cloud, r1), r2)
        once = transform_cloud(self.cloud, r2 @ r1)
        assert np.max(np.abs(twice.points - once.points)) < 1e-12

    def test_scale_and_translation(self):
        out = transform_cloud(self.cloud, np.eye(3), (1, -2, 3), 2.0)
        assert np.array_equal(out.points, 2 * self.cloud.points + [1, -2, 3])
        assert np.array_equal(out.weights, 8 * self.cloud.weights)

    @pytest.mark.parametrize("lam", [0.0, -1.0, float("nan")])
    def test_non_positive_scale(self, lam):
        with pytest.raises(ValueError):
            transform_cloud(self.cloud, np.eye(3), scale=lam)


ALL_SETS = generate_invariants(2) + generate_invariants(3) + generate_invariants(3, "rational")


class TestInvarianceReport:
    def test_sample_cloud_passes(self):
        report = invariance_report(sample_cloud(), ALL_SETS, 100, 1e-8, 0, controls=[eta_probe(2, 0, 0)])
        assert report.passed
        assert len(report.records) == 29
        assert all(r.criterion == "relative" for r in report.records)
        assert max(r.max_rel_dev for r in report.records) < 1e-11
        assert report.controls[0].max_rel_dev > 1e-3

    def test_negative_control_alone_fails(self):
        report = invariance_report(sample_cloud(), [eta_probe(2, 0, 0)], 10)
        assert not report.passed

    def test_tight_tolerance_fails(self):
        report = invariance_report(sample_cloud(), ALL_SETS, 20, 1e-16, 0)
        assert not report.passed

    def test_reports_are_bit_identical(self):
        a = invariance_report(sample_cloud(), ALL_SETS, 10, seed=3, controls=[eta_probe(1, 1, 0)]).to_json()
        b = invariance_report(sample_cloud(), ALL_SETS, 10, seed=3, controls=[eta_probe(1, 1, 0)]).to_json()
        assert a == b
        obj = json.loads(a)
        assert {"seed", "trials", "tolerance", "invariants", "controls", "pass", "error_model"} <= obj.keys()
        assert {"name", "baseline", "max_abs_dev", "max_rel_dev", "pass"} <= obj["invariants"][0].keys()

    def test_degenerate_cloud_uses_absolute_tolerance(self):
        flat = PointCloud.from_points([(0, 0, 0), (1, 0, 0), (0, 1, 0), (2, 3, 0), (1, 5, 0)])
        report = invariance_report(flat, generate_invariants(2), 5)
        assert report.degenerate
        assert all(r.criterion == "absolute" for r in report.records)

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            invariance_report(sample_cloud(), ALL_SETS, 0)

    def test_rotated_copy_has_same_values(self):
        c = sample_cloud()
        moved = transform_cloud(c, random_rotation(trial_rng(9, 0)))
        a, b = normalized_from_data(c, 3), normalized_from_data(moved, 3)
        for inv in ALL_SETS:
            va, vb = evaluate_invariant(inv, a), evaluate_invariant(inv, b)
            assert abs(va - vb) <= 1e-8 * abs(va), inv.name


@pytest.fixture(scope="module")
def report():
    return run_self_check()


class TestSelfCheck:
    def test_passes(self, report):
        assert report.passed, [r.name for r in report.failures()]
        names = {r.name for r in report.results}
        for expected in ("jacobian-rank", "poincare", "generator-count", "annihilation:ch5", "laplace-eigenspaces"):
            assert expected in names

    def test_json(self, report):
        obj = json.loads(json.dumps(report.to_json_obj()))
        assert obj["pass"] and obj["orders"] == [2, 3]

    def test_order2_only(self):
        report = run_self_check([2])
        assert report.passed
        dec = next(r for r in report.results if r.name == "decomposition")
        assert dec.detail == "V0 x1, V4 x1"

    @pytest.mark.parametrize("which", [0, 7, -1])
    def test_ch5_mutation_is_named(self, which):
        templates = load_templates()
        family = list(templates["rational_order3"])
        idx = next(i for i, t in enumerate(family) if t.name == "ch5")
        t = family[idx]
        mono = list(t.body.items())[which][0]
        family[idx] = t.with_body(t.body + Polynomial({mono: 1}))
        report = run_self_check(templates={**templates, "rational_order3": family})
        failed = {r.name for r in report.failures()}
        assert "annihilation:ch5" in failed
        assert all(name.endswith("ch5") for name in failed)
        bad = next(r for r in report.failures() if r.name == "annihilation:ch5")
        assert bad.counterexample
