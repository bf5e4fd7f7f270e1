import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from momentinv import _kernels_py, kernels

try:
    from momentinv import _kernels as compiled
except ImportError:  # extension not built; the fallback is still tested below
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def exact_sums(points, weights, max_order):
    pts = [[Fraction(x) for x in p] for p in points.tolist()]
    ws = [Fraction(w) for w in weights.tolist()]
    return [
        sum(w * p[0] ** a * p[1] ** b * p[2] ** c for w, p in zip(ws, pts))
        for a, b, c in _kernels_py.monomial_exponents(max_order).tolist()
    ]


def test_monomial_order():
    exps = _kernels_py.monomial_exponents(2).tolist()
    assert exps == [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]]


def test_error_free_transforms():
    a, b = 1.0, 1e-17
    s, e = _kernels_py._two_sum(a, b)
    assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)
    x, y = 0.1, 0.7
    p, e = _kernels_py._two_prod(x, y)
    assert Fraction(p) + Fraction(e) == Fraction(x) * Fraction(y)


@pytest.mark.parametrize("n", [1, 5, 31, 32, 33, 64, 65, 100, 1000])
def test_power_sums_are_double_double_accurate(n):
    rng = np.random.default_rng(n)
    pts = rng.uniform(-10, 10, (n, 3))
    w = rng.uniform(0, 2, n)
    hi, lo = _kernels_py.power_sums(pts, w, 3)
    for h, l, exact in zip(hi, lo, exact_sums(pts, w, 3)):
        err = abs(Fraction(float(h)) + Fraction(float(l)) - exact)
        assert err <= Fraction(1, 2**96) * max(abs(exact), Fraction(1, 10**30))


@needs_compiled
@pytest.mark.parametrize("n", [1, 5, 31, 32, 33, 64, 65, 100, 1000, 12345])
def test_backends_bitwise_equal_power_sums(n):
    rng = np.random.default_rng(n)
    pts = rng.normal(0, 5, (n, 3))
    w = rng.uniform(0, 2, n)
    a = _kernels_py.power_sums(pts, w, 4)
    b = compiled.power_sums(pts, w, 4)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@needs_compiled
@given(
    st.lists(
        st.tuples(*[st.floats(-1e3, 1e3, allow_nan=False)] * 3 + [st.floats(0, 10, allow_nan=False)]),
        min_size=1,
        max_size=80,
    ),
    st.integers(2, 5),
)
@settings(max_examples=200)
def test_backends_bitwise_equal_property(rows, max_order):
    arr = np.asarray(rows, dtype=np.float64)
    a = _kernels_py.power_sums(arr[:, :3], arr[:, 3], max_order)
    b = compiled.power_sums(arr[:, :3], arr[:, 3], max_order)
    assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()


@needs_compiled
@given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.integers(1, 6))
@settings(max_examples=100)
def test_backends_bitwise_equal_eval(seed, n_terms, n_vars):
    rng = np.random.default_rng(seed)
    re, im = rng.normal(size=n_terms), rng.normal(size=n_terms)
    exps = rng.integers(0, 4, (n_terms, n_vars))
    vals = rng.normal(size=(7, n_vars))
    a = _kernels_py.eval_monomials(re, im, exps, vals)
    b = compiled.eval_monomials(re, im, exps, vals)
    assert a.tobytes() == b.tobytes()


def test_eval_monomials_value():
    # 2*x^2*y + i*z at (x, y, z) = (3, -1, 2)
    out = _kernels_py.eval_monomials(np.array([2.0, 0.0]), np.array([0.0, 1.0]), np.array([[2, 1, 0], [0, 0, 1]]), np.array([[3.0, -1.0, 2.0]]))
    assert out[0] == complex(-18, 2)


def test_empty_input():
    hi, lo = kernels.power_sums(np.zeros((0, 3)), np.zeros(0), 2)
    assert not hi.any() and not lo.any()


@pytest.mark.parametrize("env,expected", [("1", "python"), ("", "compiled" if compiled is not None else "python")])
def test_backend_selection(env, expected):
    code = "from momentinv import kernels; print(kernels.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code], env={**os.environ, "MOMENTINV_PURE": env}, capture_output=True, text=True, check=True
    )
    assert out.stdout.strip() == expected
