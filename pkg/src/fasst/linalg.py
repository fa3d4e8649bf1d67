"""Dense linear-algebra primitives built around Givens rotations.

Matrices are plain float64 ndarrays. "Orthonormal" throughout means
max-norm of (F^T F - I) at most 1e-9; check_orthonormal enforces it at
construction sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kogbetliantz_sweep, svd2x2_angles

ORTHONORMAL_TOL = 1e-9


class ConvergenceError(RuntimeError):
    """Iterative solver did not reach the requested tolerance."""


@dataclass(frozen=True)
class GivensRotation:
    """Plane rotation mixing coordinates p and q by `angle` radians.

    Applied to a vector v it produces
        out[p] =  cos(angle)*v[p] + sin(angle)*v[q]
        out[q] = -sin(angle)*v[p] + cos(angle)*v[q]
    and leaves every other coordinate untouched (4 multiplications,
    2 additions; this count is what the complexity model charges).
    """

    p: int
    q: int
    angle: float

    def __post_init__(self):
        if self.p == self.q:
            raise ValueError("rotation indices must differ")
        if self.p < 0 or self.q < 0:
            raise IndexError("rotation indices must be non-negative")
        if not math.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")

    def inverse(self) -> "GivensRotation":
        return GivensRotation(self.p, self.q, -self.angle)


def apply_givens(v, g: GivensRotation):
    """Rotate coordinates (g.p, g.q) of a copy of v; all others unchanged."""
    v = np.asarray(v, dtype=float)
    if g.p >= v.shape[0] or g.q >= v.shape[0]:
        raise IndexError(f"rotation pair ({g.p},{g.q}) out of range for length {v.shape[0]}")
    out = v.copy()
    c = math.cos(g.angle)
    s = math.sin(g.angle)
    out[g.p] = c * v[g.p] + s * v[g.q]
    out[g.q] = -s * v[g.p] + c * v[g.q]
    return out


def rotation_matrix_2x2(theta: float) -> np.ndarray:
    """R(theta) = [[cos, sin], [-sin, cos]], the 2x2 form of apply_givens."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def givens_matrix(n: int, g: GivensRotation) -> np.ndarray:
    """Dense n x n embedding of a Givens rotation (testing/inspection aid)."""
    m = np.eye(n)
    c, s = math.cos(g.angle), math.sin(g.angle)
    m[g.p, g.p] = c
    m[g.p, g.q] = s
    m[g.q, g.p] = -s
    m[g.q, g.q] = c
    return m


def svd_2x2(a):
    """Closed-form SVD of a 2x2 matrix using proper rotations only.

    Returns (alpha, beta, (s1, s2)) where R(-alpha) @ a @ R(beta) is
    diagonal with top-left entry s1 >= s2 >= 0 and the singular values are
    (s1, s2). The second diagonal entry equals sign(det a) * s2: with
    rotations (determinant +1) a negative determinant cannot be flipped,
    which is exactly the rotation-constrained trace maximum. Zero and
    already-diagonal inputs yield zero angles.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2):
        raise ValueError("svd_2x2 expects a 2x2 matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("svd_2x2 requires finite entries")
    alpha, beta, d0, d1 = svd2x2_angles(a[0, 0], a[0, 1], a[1, 0], a[1, 1])
    return alpha, beta, (d0, abs(d1))


def offdiag_norm(a) -> float:
    """Frobenius norm of the off-diagonal part.

    Computed on a diagonal-zeroed copy; the tempting sum(A^2) - sum(diag^2)
    form cancels catastrophically once the matrix is nearly diagonal.
    """
    off = np.array(a, dtype=float)
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_svd(m, tol: float = 1e-12, max_sweeps: int = 64):
    """Two-sided Jacobi (Kogbetliantz) SVD of a square matrix.

    Cyclic-by-rows sweeps of exact 2x2 SVD rotations; converged when the
    off-diagonal Frobenius norm is at most tol * ||m||_F. Returns
    (U, S, V) with m = U @ diag(S) @ V.T and S sorted descending.
    """
    A = np.array(m, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("jacobi_svd expects a square matrix")
    n = A.shape[0]
    U = np.eye(n)
    V = np.eye(n)
    norm = float(np.linalg.norm(A))
    if norm == 0.0 or n == 1:
        s = np.abs(np.diag(A)).astype(float)
        if n == 1 and A[0, 0] < 0:
            U[0, 0] = -1.0
        return U, s, V
    A = np.ascontiguousarray(A)
    converged = False
    for _ in range(max_sweeps):
        if offdiag_norm(A) <= tol * norm:
            converged = True
            break
        kogbetliantz_sweep(A, U, V)
    if not converged and offdiag_norm(A) > tol * norm:
        raise ConvergenceError(
            f"jacobi_svd: off-diagonal norm {offdiag_norm(A):.3e} above "
            f"{tol:g}*||m||_F after {max_sweeps} sweeps")
    s = np.diag(A).copy()
    neg = s < 0
    U[:, neg] *= -1.0
    s = np.abs(s)
    order = np.argsort(-s, kind="stable")
    return np.ascontiguousarray(U[:, order]), s[order], np.ascontiguousarray(V[:, order])


def check_orthonormal(f, tol: float = ORTHONORMAL_TOL) -> np.ndarray:
    """Validate ||F^T F - I||_max <= tol and return F as a float64 array."""
    f = np.ascontiguousarray(f, dtype=float)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError("expected a square matrix")
    err = float(np.max(np.abs(f.T @ f - np.eye(f.shape[0]))))
    if not np.isfinite(err) or err > tol:
        raise ValueError(f"matrix is not orthonormal (deviation {err:.3e} > {tol:g})")
    return f


def is_orthonormal(f, tol: float = ORTHONORMAL_TOL) -> bool:
    try:
        check_orthonormal(f, tol)
    except ValueError:
        return False
    return True


def procrustes(gamma) -> np.ndarray:
    """Orthonormal F maximizing tr(gamma @ F).

    F = V @ U.T from the SVD gamma = U S V^T; the attained maximum equals
    the sum of the singular values of gamma.
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise ValueError("procrustes expects a square matrix")
    U, _, V = jacobi_svd(gamma)
    return check_orthonormal(V @ U.T)


def eigh_descending(sym):
    """Eigen-decomposition of a symmetric matrix, eigenvalues descending."""
    w, v = np.linalg.eigh(np.asarray(sym, dtype=float))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def fix_eigvec_signs(v: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column positive (in place)."""
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    v *= signs
    return v
