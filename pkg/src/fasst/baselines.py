"""Reference secondary transforms: KLT, reduced-output variants with
coefficient dropping, and a Givens-budgeted KLT approximation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .givens_transform import FasstKernel, factorize_approx
from .linalg import ORTHONORMAL_TOL
from .sot import SotModel, sample_klt


def klt_learn(x) -> np.ndarray:
    """Karhunen-Loeve transform of an (n, m_e) sample matrix.

    Columns are the sample-covariance eigenvectors sorted by descending
    eigenvalue; the largest-magnitude entry of each column is positive so
    kernels reproduce across platforms.
    """
    return sample_klt(x)


@dataclass(frozen=True)
class ReducedKernel:
    """First n_k rows of an orthonormal analysis transform; the remaining
    outputs are never computed (forced to zero)."""

    n: int
    n_k: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n_k <= self.n:
            raise ValueError("n_k must be in [1, n]")
        if self.matrix.shape != (self.n_k, self.n):
            raise ValueError("reduced kernel must be (n_k, n)")
        gram = self.matrix @ self.matrix.T
        if np.max(np.abs(gram - np.eye(self.n_k))) > ORTHONORMAL_TOL:
            raise ValueError("reduced kernel rows must be orthonormal")


def _reduce(full: np.ndarray, n_k: int) -> ReducedKernel:
    full = np.asarray(full, dtype=float)
    n = full.shape[0]
    if not 1 <= n_k <= n:
        raise ValueError(f"n_k={n_k} out of range for n={n}")
    return ReducedKernel(n=n, n_k=n_k, matrix=full[:, :n_k].T.copy())


def lfnst_from_klt(klt: np.ndarray, n_k: int) -> ReducedKernel:
    """Reduced KLT: keep the first n_k analysis outputs, drop the rest.

    Reconstruction zero-pads, so per-sample reconstruction error equals the
    energy in the dropped coefficients.
    """
    return _reduce(klt, n_k)


def lf_sot(model: SotModel, n_k: int) -> ReducedKernel:
    """Reduced sparse orthonormal transform (same dropping rule as LFNST)."""
    return _reduce(model.matrix, n_k)


def klt_gr(klt: np.ndarray, tau: float, j_max: int) -> FasstKernel:
    """Approximate a KLT with a budgeted Givens rotation sequence.

    Factorizing gamma = K^T makes the returned S greedily maximize
    tr(K^T S), i.e. minimize ||K - S||_F over the rotation-sequence class.
    """
    klt = np.asarray(klt, dtype=float)
    return factorize_approx(klt.T, tau, j_max)
