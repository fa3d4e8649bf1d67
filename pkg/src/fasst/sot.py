"""Sparse orthonormal transform learning.

Alternating minimization on the l0-regularized reconstruction objective

    sum_i ||x_i - F y_i||^2 + mu * ||y_i||_0,   F^T F = I

where both steps are exact minimizers: hard thresholding for the
coefficients, an orthogonal Procrustes solve for the transform. The loop is
therefore monotone. Sample matrices are (n, m_e), one sample per column.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import check_orthonormal, eigh_descending, fix_eigvec_signs, procrustes


@dataclass
class SotModel:
    matrix: np.ndarray = field(repr=False)
    mu: float
    objective_trace: list[float]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def hard_threshold(c, mu: float):
    """Zero every entry with |c| < sqrt(mu); the boundary |c| = sqrt(mu) is kept.

    Exact minimizer of ||c - y||^2 + mu*||y||_0 over y.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    c = np.asarray(c, dtype=float)
    if mu == 0:
        return c.copy()
    return np.where(np.abs(c) >= np.sqrt(mu), c, 0.0)


def sot_objective(x, f, y, mu: float) -> float:
    """Summed squared reconstruction error plus mu times the nonzero count."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.shape != y.shape or f.shape != (x.shape[0], x.shape[0]):
        raise ValueError("dimension mismatch between samples and transform")
    resid = x - f @ y
    return float(np.sum(resid * resid) + mu * np.count_nonzero(y))


def sample_klt(x) -> np.ndarray:
    """Eigenvector basis of the sample covariance, descending eigenvalues.

    Sign convention: largest-magnitude entry of each column positive.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError("need an (n, m_e) sample matrix with m_e >= 2")
    cov = (x @ x.T) / x.shape[1]
    _, v = eigh_descending(cov)
    return check_orthonormal(fix_eigvec_signs(v))


def sot_learn(x, mu: float, init=None, max_iter: int = 100, eps: float = 1e-6) -> SotModel:
    """Learn a sparse orthonormal transform by alternating minimization.

    init defaults to the KLT of x (standard warm start). Stops when the
    relative objective change drops below eps or after max_iter rounds; the
    objective is recorded after each thresholding step, so the trace is
    non-increasing.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected an (n, m_e) sample matrix")
    n, m_e = x.shape
    if m_e < n:
        warnings.warn(f"only {m_e} samples for dimension {n}; the learned "
                      "transform may be poorly conditioned", stacklevel=2)
    if init is None:
        f = sample_klt(x)
    else:
        f = check_orthonormal(np.asarray(init, dtype=float))
        if f.shape != (n, n):
            raise ValueError("init has the wrong dimension")

    trace: list[float] = []
    prev = None
    floor = 1e-12 * max(float(np.sum(x * x)), 1.0)
    for _ in range(max_iter):
        y = hard_threshold(f.T @ x, mu)
        obj = sot_objective(x, f, y, mu)
        trace.append(obj)
        if obj <= floor or (prev is not None and abs(prev - obj) <= eps * abs(prev)):
            break
        prev = obj
        f = procrustes(y @ x.T)
    return SotModel(matrix=f, mu=mu, objective_trace=trace)
