"""Slow, obviously-correct reference implementations used as test oracles."""

import math
from functools import lru_cache


@lru_cache(maxsize=None)
def monotone_paths(n, m):
    """All warping paths from (0, 0) to (n-1, m-1) with steps (1,0), (0,1), (1,1)."""
    if n == 1 and m == 1:
        return (((0, 0),),)
    out = []
    for di, dj in ((1, 0), (0, 1), (1, 1)):
        pi, pj = n - di, m - dj
        if pi >= 1 and pj >= 1:
            for p in monotone_paths(pi, pj):
                out.append(p + ((n - 1, m - 1),))
    return tuple(out)


def brute_force_warp(psi):
    """Minimum path cost of a local cost matrix (list of lists)."""
    n, m = len(psi), len(psi[0])
    best = math.inf
    for path in monotone_paths(n, m):
        total = 0.0
        for i, j in path:
            total += psi[i][j]
        best = min(best, total)
    return best


def unit_pair_angle(a0, a1, b0, b1):
    """Angle between (a0, a1) and (b0, b1) via acos of the clamped cosine."""
    na, nb = math.hypot(a0, a1), math.hypot(b0, b1)
    if na < 1e-12 and nb < 1e-12:
        return 0.0
    if na < 1e-12 or nb < 1e-12:
        return math.pi / 2
    c = (a0 * b0 + a1 * b1) / (na * nb)
    return math.acos(max(-1.0, min(1.0, c)))


def reference_psi(x, y, band=math.inf, xdays=None, ydays=None):
    """Angular cost matrix by direct definition (plain Python)."""
    xdays = xdays or list(range(len(x)))
    ydays = ydays or list(range(len(y)))
    psi = []
    for i in range(1, len(x)):
        row = []
        for j in range(1, len(y)):
            if abs(xdays[i] - ydays[j]) > band:
                row.append(math.inf)
            else:
                row.append(unit_pair_angle(x[i - 1], x[i], y[j - 1], y[j]))
        psi.append(row)
    return psi


def reference_abs(x, y):
    return [[abs(a - b) for b in y] for a in x]


def sg_center_weight(window, order):
    """Centre weight of a Savitzky-Golay filter from the normal equations."""
    import numpy as np

    half = window // 2
    t = np.arange(-half, half + 1, dtype=float)
    A = np.vander(t, order + 1, increasing=True)
    # row 0 of (A^T A)^-1 A^T evaluates the fit at t = 0
    return np.linalg.solve(A.T @ A, A.T)[0]
