"""Shared test helpers: independent oracles kept free of package internals."""

import itertools

import numpy as np


def random_orthonormal(n, rng):
    """Haar-ish random orthonormal matrix via QR with sign fixing."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_orthonormal_batch(count, n, rng):
    q, r = np.linalg.qr(rng.standard_normal((count, n, n)))
    signs = np.sign(np.einsum("bii->bi", r))
    return q * signs[:, None, :]


def jacobi_eig_oracle(sym, sweeps=100, tol=1e-14):
    """Brute-force symmetric Jacobi eigensolver (plain NumPy, no package
    code). Returns eigenvalues sorted descending."""
    a = np.array(sym, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * np.linalg.norm(a):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * a[p, q], a[p, p] - a[q, q])
                c, s = np.cos(theta), np.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = -s
                rot[q, p] = s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]


def brute_force_l0_min(c, mu):
    """Minimize ||c - y||^2 + mu*||y||_0 by enumerating all supports.

    For orthonormal transforms this is the exact coefficient subproblem.
    Returns (best objective, best y).
    """
    c = np.asarray(c, dtype=float)
    n = len(c)
    best = (np.inf, None)
    for bits in itertools.product([0, 1], repeat=n):
        y = c * np.array(bits)
        obj = float(np.sum((c - y) ** 2) + mu * np.count_nonzero(y))
        if obj < best[0]:
            best = (obj, y)
    return best
