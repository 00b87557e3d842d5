"""Independent reference computations used only by the tests.

Nothing here imports the package's numerical code paths.
"""

import math

import numpy as np


def jacobi_eigh(A, tol=1e-15, max_sweeps=100):
    """Cyclic Jacobi rotations for a symmetric matrix.

    Returns (eigenvalues, eigenvectors as columns) sorted ascending.
    """
    A = np.array(A, dtype=float)
    n = len(A)
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(A[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off < tol * max(1.0, np.abs(A).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def pinv_solve(H, y):
    """The textbook estimator (H^T H)^{-1} H^T y, formed explicitly."""
    H = np.asarray(H, dtype=float)
    return np.linalg.inv(H.T @ H) @ H.T @ np.asarray(y, dtype=float)


def median(values):
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        return None
    if n % 2:
        return xs[n // 2]
    return (xs[n // 2 - 1] + xs[n // 2]) / 2


def mean_in(ts, vs, lo, hi):
    sel = [v for t, v in zip(ts, vs) if lo <= t < hi]
    return sum(sel) / len(sel) if sel else None


def percentile_linear(values, q):
    """Linear interpolation between closest ranks (the 'type 7' definition)."""
    xs = sorted(values)
    h = (len(xs) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (h - lo) * (xs[hi] - xs[lo])
