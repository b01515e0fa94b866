"""Exact rank, row reduction and kernels over F_p and over the rationals."""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np

_INT64_SAFE_PRIME = 3037000499


def _as_modp(A, p: int) -> np.ndarray:
    A = np.asarray(A)
    if p < _INT64_SAFE_PRIME:
        if A.dtype == object:
            A = np.array([[int(x) % p for x in row] for row in A], dtype=np.int64).reshape(A.shape)
        else:
            A = A.astype(np.int64) % p
    else:
        A = np.array([[int(x) % p for x in row] for row in A], dtype=object).reshape(A.shape)
    return A


def rref_mod_p(A, p: int, reduce_above: bool = True) -> tuple[np.ndarray, list[int]]:
    """Row-reduce ``A`` over F_p.

    Returns the (reduced) echelon form and the list of pivot columns; the
    rank is ``len(pivots)``.  Rows with pivots are normalised to 1.
    """
    R = _as_modp(A, p).copy()
    if R.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    n_rows, n_cols = R.shape
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if len(nz) == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            R[[r, piv]] = R[[piv, r]]
        inv = pow(int(R[r, c]), -1, p)
        R[r, c:] = (R[r, c:] * inv) % p
        targets = r + 1 + np.flatnonzero(R[r + 1:, c])
        if reduce_above:
            targets = np.concatenate([np.flatnonzero(R[:r, c]), targets])
        if len(targets):
            f = R[targets, c].reshape(-1, 1)
            R[targets, c:] = (R[targets, c:] - (f * R[r, c:]) % p) % p
        pivots.append(c)
        r += 1
    return R, pivots


def rank_mod_p(A, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    # eliminate along the shorter dimension
    if A.shape[0] > A.shape[1]:
        A = A.T
    return len(rref_mod_p(A, p, reduce_above=False)[1])


def nullspace_mod_p(A, p: int, n_cols: int | None = None) -> np.ndarray:
    """Basis (as rows) of ``{x : A x = 0}`` over F_p."""
    A = np.asarray(A)
    if A.size == 0:
        n = A.shape[1] if A.ndim == 2 else n_cols
        K = np.eye(n, dtype=np.int64 if p < _INT64_SAFE_PRIME else object)
        return K
    R, pivots = rref_mod_p(A, p)
    n = R.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    dtype = R.dtype
    K = np.zeros((len(free), n), dtype=dtype)
    if dtype == object:
        K.fill(0)
    for k, fc in enumerate(free):
        K[k, fc] = 1
        for i, pc in enumerate(pivots):
            K[k, pc] = (-R[i, fc]) % p
    return K


def _integer_rows(A) -> list[list[int]]:
    rows = []
    for row in np.asarray(A, dtype=object):
        vals = [Fraction(x) if not isinstance(x, (int, np.integer)) else int(x) for x in row]
        den = lcm(*[v.denominator for v in vals if isinstance(v, Fraction)] or [1])
        rows.append([int(v * den) for v in vals])
    return rows


def rank_rational(A) -> int:
    """Exact rank over Q by fraction-free (Bareiss) elimination."""
    A = np.asarray(A, dtype=object)
    if A.size == 0:
        return 0
    if A.shape[0] > A.shape[1]:
        A = A.T
    M = _integer_rows(A)
    n_rows, n_cols = len(M), len(M[0])
    r = 0
    prev = 1
    for c in range(n_cols):
        if r == n_rows:
            break
        piv = next((i for i in range(r, n_rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pr = M[r]
        a = pr[c]
        for i in range(r + 1, n_rows):
            row = M[i]
            b = row[c]
            # exact division by the previous pivot (Bareiss)
            M[i] = [(a * row[k] - b * pr[k]) // prev if k > c else 0 for k in range(n_cols)]
        prev = a
        r += 1
    return r



def nullspace_rational(A, n_cols: int | None = None) -> list[list[Fraction]]:
    """Basis (as rows) of the rational kernel of ``A``, via exact Gauss-Jordan."""
    A = np.asarray(A, dtype=object)
    if A.size == 0:
        n = A.shape[1] if A.ndim == 2 and A.shape[1] else n_cols
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    M = [[Fraction(x) for x in row] for row in A]
    n_rows, n = len(M), len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == n_rows:
            break
        piv = next((i for i in range(r, n_rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(n_rows):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
    pivot_set = set(pivots)
    basis = []
    for fc in (c for c in range(n) if c not in pivot_set):
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            vec[pc] = -M[i][fc]
        basis.append(vec)
    return basis
