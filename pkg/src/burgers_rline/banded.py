"""Direct LU solver for banded Newton systems.

Storage follows the LAPACK/``scipy.linalg.solve_banded`` convention:
``bands[u + i - j, j] == a[i, j]`` with ``u`` the number of superdiagonals.
The factorization is the column-oriented band elimination of LAPACK's
gbtf2 (partial pivoting, ``half_bandwidth`` extra superdiagonals of fill),
compiled with numba.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import SingularMatrixError

HALF_BANDWIDTH = 2
PIVOT_FLOOR = 1e-300


@dataclass
class BandedMatrix:
    n: int
    half_bandwidth: int
    bands: np.ndarray  # (2 * half_bandwidth + 1, n)

    @classmethod
    def zeros(cls, n, half_bandwidth=HALF_BANDWIDTH):
        return cls(n, half_bandwidth, np.zeros((2 * half_bandwidth + 1, n)))

    @classmethod
    def from_dense(cls, a, half_bandwidth=HALF_BANDWIDTH):
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        out = cls.zeros(n, half_bandwidth)
        k = half_bandwidth
        for off in range(-k, k + 1):
            d = np.diagonal(a, offset=off)
            if off >= 0:
                out.bands[k - off, off:] = d
            else:
                out.bands[k - off, : n + off] = d
        return out

    def to_dense(self):
        n, k = self.n, self.half_bandwidth
        a = np.zeros((n, n))
        for off in range(-k, k + 1):
            if off >= 0:
                a += np.diag(self.bands[k - off, off:], off)
            else:
                a += np.diag(self.bands[k - off, : n + off], off)
        return a

    def matvec(self, x):
        n, k = self.n, self.half_bandwidth
        y = np.zeros(n)
        for off in range(-k, k + 1):
            row = self.bands[k - off]
            if off >= 0:
                y[: n - off] += row[off:] * x[off:]
            else:
                y[-off:] += row[: n + off] * x[: n + off]
        return y


@njit(cache=True)
def _gbtrf(ab, kl, ku, floor):
    n = ab.shape[1]
    kv = kl + ku
    ipiv = np.empty(n, dtype=np.int64)
    ju = 0
    for j in range(n):
        km = min(kl, n - 1 - j)
        jp = 0
        big = abs(ab[kv, j])
        for r in range(1, km + 1):
            v = abs(ab[kv + r, j])
            if v > big:
                big = v
                jp = r
        ipiv[j] = j + jp
        if big < floor:
            return ipiv, j
        ju = max(ju, min(j + ku + jp, n - 1))
        if jp != 0:
            for c in range(j, ju + 1):
                tmp = ab[kv + j - c, c]
                ab[kv + j - c, c] = ab[kv + j + jp - c, c]
                ab[kv + j + jp - c, c] = tmp
        pivot = ab[kv, j]
        for r in range(1, km + 1):
            ab[kv + r, j] /= pivot
        for c in range(j + 1, ju + 1):
            f = ab[kv + j - c, c]
            if f != 0.0:
                for r in range(1, km + 1):
                    ab[kv + j + r - c, c] -= ab[kv + r, j] * f
    return ipiv, -1


@njit(cache=True)
def _gbtrs(ab, kl, ku, ipiv, b):
    n = ab.shape[1]
    kv = kl + ku
    x = b.copy()
    for j in range(n - 1):
        p = ipiv[j]
        if p != j:
            tmp = x[j]
            x[j] = x[p]
            x[p] = tmp
        km = min(kl, n - 1 - j)
        for r in range(1, km + 1):
            x[j + r] -= ab[kv + r, j] * x[j]
    for j in range(n - 1, -1, -1):
        x[j] /= ab[kv, j]
        for r in range(1, min(kv, j) + 1):
            x[j - r] -= ab[kv - r, j] * x[j]
    return x


@dataclass
class BandedLu:
    factors: np.ndarray  # LAPACK gbtrf layout, (3 * half_bandwidth + 1, n)
    pivot_permutation: np.ndarray
    half_bandwidth: int

    @property
    def n(self):
        return self.factors.shape[1]


def factorize(a: BandedMatrix) -> BandedLu:
    """LU with partial pivoting; fill is confined to ``half_bandwidth`` extra superdiagonals."""
    k = a.half_bandwidth
    ab = np.zeros((3 * k + 1, a.n))
    ab[k:] = a.bands
    piv, bad = _gbtrf(ab, k, k, PIVOT_FLOOR)
    if bad >= 0:
        raise SingularMatrixError(f"singular banded matrix: pivot {bad} below {PIVOT_FLOOR:g}")
    return BandedLu(ab, piv, k)


def solve(lu: BandedLu, rhs) -> np.ndarray:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (lu.n,):
        raise ValueError(f"rhs has shape {rhs.shape}, expected ({lu.n},)")
    return _gbtrs(lu.factors, lu.half_bandwidth, lu.half_bandwidth, lu.pivot_permutation, rhs)
