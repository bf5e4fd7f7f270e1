# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels; operation order mirrors ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp

from ._kernels_py import BLOCK, monomial_exponents

cnp.import_array()

cdef double _SPLIT = 134217729.0


cdef struct dd:
    double hi
    double lo


cdef inline dd _two_sum(double a, double b) noexcept nogil:
    cdef dd r
    cdef double bb
    r.hi = a + b
    bb = r.hi - a
    r.lo = (a - (r.hi - bb)) + (b - bb)
    return r


cdef inline dd _quick_two_sum(double a, double b) noexcept nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r


cdef inline dd _two_prod(double a, double b) noexcept nogil:
    cdef dd r
    cdef double c, ah, al, bh, bl
    r.hi = a * b
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    r.lo = ((ah * bh - r.hi) + ah * bl + al * bh) + al * bl
    return r


cdef inline dd dd_add(dd a, dd b) noexcept nogil:
    cdef dd s = _two_sum(a.hi, b.hi)
    cdef dd t = _two_sum(a.lo, b.lo)
    s.lo = s.lo + t.hi
    s = _quick_two_sum(s.hi, s.lo)
    s.lo = s.lo + t.lo
    return _quick_two_sum(s.hi, s.lo)


cdef inline dd dd_mul(dd a, dd b) noexcept nogil:
    cdef dd p = _two_prod(a.hi, b.hi)
    p.lo = p.lo + (a.hi * b.lo + a.lo * b.hi)
    return _quick_two_sum(p.hi, p.lo)


cdef inline dd dd_mul_d(dd a, double b) noexcept nogil:
    cdef dd p = _two_prod(a.hi, b)
    p.lo = p.lo + a.lo * b
    return _quick_two_sum(p.hi, p.lo)


def power_sums(points, weights, int max_order):
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    cdef double[::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t[:, ::1] exps = np.ascontiguousarray(monomial_exponents(max_order), dtype=np.intp)
    cdef Py_ssize_t n = pts.shape[0], n_mono = exps.shape[0]
    cdef Py_ssize_t block = BLOCK
    if n == 0:
        return np.zeros(n_mono), np.zeros(n_mono)
    cdef Py_ssize_t n_blocks = (n + block - 1) // block
    hi_arr = np.zeros((n_blocks, n_mono))
    lo_arr = np.zeros((n_blocks, n_mono))
    cdef double[:, ::1] hi = hi_arr
    cdef double[:, ::1] lo = lo_arr
    cdef double[:, ::1] ph = np.empty((3, max_order + 1))
    cdef double[:, ::1] pl = np.empty((3, max_order + 1))
    cdef Py_ssize_t b, i, k, m, axis, start, stop, level_n, half
    cdef dd t, acc, p
    with nogil:
        for b in range(n_blocks):
            start = b * block
            stop = start + block
            if stop > n:
                stop = n
            for i in range(start, stop):
                for axis in range(3):
                    ph[axis, 0] = 1.0
                    pl[axis, 0] = 0.0
                    for k in range(1, max_order + 1):
                        p.hi = ph[axis, k - 1]
                        p.lo = pl[axis, k - 1]
                        p = dd_mul_d(p, pts[i, axis])
                        ph[axis, k] = p.hi
                        pl[axis, k] = p.lo
                for m in range(n_mono):
                    t.hi = w[i]
                    t.lo = 0.0
                    for axis in range(3):
                        p.hi = ph[axis, exps[m, axis]]
                        p.lo = pl[axis, exps[m, axis]]
                        t = dd_mul(t, p)
                    if i == start:
                        hi[b, m] = t.hi
                        lo[b, m] = t.lo
                    else:
                        acc.hi = hi[b, m]
                        acc.lo = lo[b, m]
                        acc = dd_add(acc, t)
                        hi[b, m] = acc.hi
                        lo[b, m] = acc.lo
        # pairwise levels: row k <- row 2k + row 2k+1, odd tail carried
        level_n = n_blocks
        while level_n > 1:
            half = level_n // 2
            for k in range(half):
                for m in range(n_mono):
                    acc.hi = hi[2 * k, m]
                    acc.lo = lo[2 * k, m]
                    t.hi = hi[2 * k + 1, m]
                    t.lo = lo[2 * k + 1, m]
                    acc = dd_add(acc, t)
                    hi[k, m] = acc.hi
                    lo[k, m] = acc.lo
            if level_n % 2:
                for m in range(n_mono):
                    hi[half, m] = hi[level_n - 1, m]
                    lo[half, m] = lo[level_n - 1, m]
                level_n = half + 1
            else:
                level_n = half
    return hi_arr[0].copy(), lo_arr[0].copy()


def eval_monomials(coeff_re, coeff_im, exponents, values):
    cdef double[::1] cre = np.ascontiguousarray(coeff_re, dtype=np.float64)
    cdef double[::1] cim = np.ascontiguousarray(coeff_im, dtype=np.float64)
    cdef Py_ssize_t[:, ::1] exps = np.ascontiguousarray(exponents, dtype=np.intp)
    # variable-major so the batch loop runs over contiguous memory
    cdef double[:, ::1] vals = np.ascontiguousarray(np.asarray(values, dtype=np.float64).T)
    cdef Py_ssize_t n_vars = exps.shape[1], batch = vals.shape[1], n_terms = exps.shape[0]
    out_arr = np.empty(batch, dtype=np.complex128)
    cdef double[::1] re = np.zeros(batch)
    cdef double[::1] im = np.zeros(batch)
    cdef double[::1] m = np.empty(batch)
    cdef Py_ssize_t r, t, j, e
    with nogil:
        # per row the operation order matches the numpy fallback: term by term,
        # powers multiplied in variable order
        for t in range(n_terms):
            for r in range(batch):
                m[r] = 1.0
            for j in range(n_vars):
                for e in range(exps[t, j]):
                    for r in range(batch):
                        m[r] = m[r] * vals[j, r]
            for r in range(batch):
                re[r] = re[r] + cre[t] * m[r]
                im[r] = im[r] + cim[t] * m[r]
    out_arr.real = np.asarray(re)
    out_arr.imag = np.asarray(im)
    return out_arr
