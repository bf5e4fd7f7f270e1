"""Pure numpy implementation of the numeric kernels.

Raw moments of translated data are dominated by cancellation once the
binomial shift subtracts the centroid, so power sums are carried in
double-double arithmetic (an unevaluated sum ``hi + lo`` of two doubles,
about 106 significant bits) built from error-free transformations.

Both backends follow the same floating-point operation order, so their
results agree bit for bit:

* power sums: per-point terms ``((w * x^p) * y^q) * z^r`` in double-double
  with powers built by repeated multiplication; points are accumulated
  sequentially inside blocks of ``BLOCK`` points, then block sums are combined
  pairwise level by level (adjacent pairs, an odd trailing block carried up).
* monomial evaluation: each term is the product of its variable powers in
  variable order, and terms are accumulated sequentially in plain doubles.

The splitting constant limits inputs to magnitudes below about 1e300.
"""

from __future__ import annotations

import numpy as np

BLOCK = 32
_SPLIT = 134217729.0  # 2**27 + 1


def monomial_exponents(max_order: int) -> np.ndarray:
    """Exponent triples with total order ``<= max_order``: by order, then p and q descending."""
    out = [
        (p, q, n - p - q)
        for n in range(max_order + 1)
        for p in range(n, -1, -1)
        for q in range(n - p, -1, -1)
    ]
    return np.asarray(out, dtype=np.intp).reshape(-1, 3)


# -- error-free transformations (elementwise on arrays) ---------------------------------


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(ah, al, bh, bl):
    s1, s2 = _two_sum(ah, bh)
    t1, t2 = _two_sum(al, bl)
    s2 = s2 + t1
    s1, s2 = _quick_two_sum(s1, s2)
    s2 = s2 + t2
    return _quick_two_sum(s1, s2)


def dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum(p, e)


def dd_mul_d(ah, al, b):
    p, e = _two_prod(ah, b)
    e = e + al * b
    return _quick_two_sum(p, e)


# -- kernels -----------------------------------------------------------------------------


def _pairwise_rows(hi: np.ndarray, lo: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    while hi.shape[0] > 1:
        n = hi.shape[0]
        even = n - n % 2
        h, l = dd_add(hi[0:even:2], lo[0:even:2], hi[1:even:2], lo[1:even:2])
        if n % 2:
            h = np.concatenate([h, hi[n - 1 :]])
            l = np.concatenate([l, lo[n - 1 :]])
        hi, lo = h, l
    return hi[0], lo[0]


def power_sums(points: np.ndarray, weights: np.ndarray, max_order: int) -> tuple[np.ndarray, np.ndarray]:
    """Double-double sums ``sum w * x^p y^q z^r`` for each triple of ``monomial_exponents``.

    Returns ``(hi, lo)``; the represented value of entry m is ``hi[m] + lo[m]``.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    exps = monomial_exponents(max_order)
    n, n_mono = pts.shape[0], len(exps)
    if n == 0:
        return np.zeros(n_mono), np.zeros(n_mono)
    ph = np.empty((3, max_order + 1, n))
    pl = np.empty((3, max_order + 1, n))
    for axis in range(3):
        ph[axis, 0], pl[axis, 0] = 1.0, 0.0
        for k in range(1, max_order + 1):
            ph[axis, k], pl[axis, k] = dd_mul_d(ph[axis, k - 1], pl[axis, k - 1], pts[:, axis])
    th = np.broadcast_to(w[:, None], (n, n_mono)).copy()
    tl = np.zeros((n, n_mono))
    for axis in range(3):
        idx = exps[:, axis]
        th, tl = dd_mul(th, tl, ph[axis][idx].T, pl[axis][idx].T)

    n_blocks = -(-n // BLOCK)
    hi = np.zeros((n_blocks, n_mono))
    lo = np.zeros((n_blocks, n_mono))
    starts = np.arange(n_blocks) * BLOCK
    hi[:], lo[:] = th[starts], tl[starts]
    for i in range(1, BLOCK):
        rows = starts + i
        live = rows < n
        if not live.any():
            break
        h, l = dd_add(hi[live], lo[live], th[rows[live]], tl[rows[live]])
        hi[live], lo[live] = h, l
    return _pairwise_rows(hi, lo)


def eval_monomials(
    coeff_re: np.ndarray, coeff_im: np.ndarray, exponents: np.ndarray, values: np.ndarray
) -> np.ndarray:
    """Evaluate ``sum_t c_t * prod_j v_j^e_tj`` for every row of ``values``.

    ``exponents`` has shape (terms, vars); ``values`` is real with shape
    (batch, vars). Returns a complex array of shape (batch,).
    """
    exps = np.asarray(exponents, dtype=np.intp)
    vals = np.asarray(values, dtype=np.float64)
    batch = vals.shape[0]
    re = np.zeros(batch)
    im = np.zeros(batch)
    for t in range(exps.shape[0]):
        m = np.ones(batch)
        for j in np.flatnonzero(exps[t]):
            for _ in range(exps[t, j]):
                m = m * vals[:, j]
        re = re + coeff_re[t] * m
        im = im + coeff_im[t] * m
    out = np.empty(batch, dtype=np.complex128)
    out.real = re
    out.imag = im
    return out
