"""Exact linear algebra over the Gaussian rationals.

Rows are cleared of denominators and reduced with Bareiss' fraction-free
elimination over the Gaussian integers, so every intermediate entry is a
minor of the input and no rational arithmetic happens until
back-substitution.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .gaussian import ONE, ZERO, GaussianRational, as_gaussian

__all__ = ["rank", "nullspace", "rref", "echelon_fraction_free"]

GInt = tuple[int, int]


def _gmul(x: GInt, y: GInt) -> GInt:
    return (x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _gsub(x: GInt, y: GInt) -> GInt:
    return (x[0] - y[0], x[1] - y[1])


def _gdiv_exact(x: GInt, y: GInt) -> GInt:
    norm = y[0] * y[0] + y[1] * y[1]
    re = x[0] * y[0] + x[1] * y[1]
    im = x[1] * y[0] - x[0] * y[1]
    qr, rr = divmod(re, norm)
    qi, ri = divmod(im, norm)
    if rr or ri:
        raise ArithmeticError("Bareiss division was not exact")
    return (qr, qi)


def _integer_rows(matrix: Sequence[Sequence[object]]) -> list[list[GInt]]:
    rows = []
    for row in matrix:
        vals = [as_gaussian(x) for x in row]
        den = 1
        for v in vals:
            den = lcm(den, v.re.denominator, v.im.denominator)
        rows.append([(int(v.re * den), int(v.im * den)) for v in vals])
    return rows


def echelon_fraction_free(matrix: Sequence[Sequence[object]]) -> tuple[list[list[GInt]], list[int]]:
    """Row-echelon form of ``matrix`` (scaled rows) and its pivot columns."""
    m = _integer_rows(matrix)
    if not m:
        return [], []
    n_rows, n_cols = len(m), len(m[0])
    prev: GInt = (1, 0)
    r = 0
    pivots: list[int] = []
    for c in range(n_cols):
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if m[i][c] != (0, 0)), None)
        if p is None:
            continue
        if p != r:
            m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, n_rows):
            lead = m[i][c]
            row_i, row_r = m[i], m[r]
            for j in range(c + 1, n_cols):
                row_i[j] = _gdiv_exact(_gsub(_gmul(piv, row_i[j]), _gmul(lead, row_r[j])), prev)
            row_i[c] = (0, 0)
        prev = piv
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(matrix: Sequence[Sequence[object]]) -> int:
    return len(echelon_fraction_free(matrix)[1])


def rref(rows: Sequence[Sequence[object]]) -> list[list[GaussianRational]]:
    """Reduced row-echelon form over the field; zero rows dropped."""
    m = [[as_gaussian(x) for x in row] for row in rows]
    if not m:
        return []
    n_rows, n_cols = len(m), len(m[0])
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = m[r][c].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == n_rows:
            break
    return m[:r]


def nullspace(matrix: Sequence[Sequence[object]], n_cols: int | None = None) -> list[list[GaussianRational]]:
    """Canonical basis of ``{x : matrix @ x = 0}``.

    The basis is returned in reduced row-echelon form with respect to the
    column order, so each vector has leading entry 1 and the result does not
    depend on how the equations were ordered.
    """
    if n_cols is None:
        if not matrix:
            raise ValueError("n_cols required for an empty matrix")
        n_cols = len(matrix[0])
    echelon, pivots = echelon_fraction_free(matrix) if matrix else ([], [])
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = [ZERO] * n_cols
        x[f] = ONE
        for row, pc in zip(reversed(echelon), reversed(pivots)):
            acc = ZERO
            for j in range(pc + 1, n_cols):
                if x[j] and row[j] != (0, 0):
                    acc = acc + GaussianRational._raw(Fraction(row[j][0]), Fraction(row[j][1])) * x[j]
            piv = GaussianRational._raw(Fraction(row[pc][0]), Fraction(row[pc][1]))
            x[pc] = -acc / piv
        basis.append(x)
    return rref(basis)
