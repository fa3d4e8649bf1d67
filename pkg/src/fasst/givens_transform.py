"""Secondary transforms factored into Givens rotation sequences.

A learned kernel is S = V U^T where U and V are products of plane rotations
sharing one pair sequence:

    U = G(p_1,q_1,alpha_1) ... G(p_J,q_J,alpha_J)
    V = G(p_1,q_1,beta_1)  ... G(p_J,q_J,beta_J)

The factorization is greedy: each step picks the coordinate pair with the
strongest entry in the symmetrized right covariance of the rotated
cross-covariance, then solves that pair's 2x2 SVD exactly. The stopping
statistic e_j is the off-diagonal Frobenius energy of the rotated
cross-covariance over its total energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .backend import rotate_pairs
from .linalg import GivensRotation, check_orthonormal, svd_2x2
from .sot import hard_threshold, sot_learn, sot_objective

# full recomputation cadence for the incrementally rotated cross-covariance
_REFRESH_EVERY = 32
_REFRESH_TOL = 1e-10


@dataclass(eq=False)
class FasstKernel:
    """Immutable rotation-sequence secondary transform."""

    n: int
    left_rotations: tuple[GivensRotation, ...]
    right_rotations: tuple[GivensRotation, ...]
    e_final: float
    mu: float | None = None
    e_trace: tuple[float, ...] | None = field(default=None, repr=False)
    objective_trace: tuple[float, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.left_rotations = tuple(self.left_rotations)
        self.right_rotations = tuple(self.right_rotations)
        if len(self.left_rotations) != len(self.right_rotations):
            raise ValueError("left/right rotation sequences must have equal length")
        pairs = []
        for gl, gr in zip(self.left_rotations, self.right_rotations):
            if (gl.p, gl.q) != (gr.p, gr.q):
                raise ValueError("left/right sequences must share the pair sequence")
            if not (0 <= gl.q < gl.p < self.n):
                raise ValueError(f"rotation pair ({gl.p},{gl.q}) invalid for dimension {self.n}")
            pairs.append((gl.p, gl.q))
        if len(set(pairs)) != len(pairs):
            raise ValueError("a coordinate pair may appear at most once")
        if len(pairs) > self.n * (self.n - 1) // 2:
            raise ValueError("more rotations than coordinate pairs")

    @property
    def J(self) -> int:
        return len(self.left_rotations)

    @cached_property
    def _seq(self):
        pp = np.array([g.p for g in self.left_rotations], dtype=np.int64)
        qq = np.array([g.q for g in self.left_rotations], dtype=np.int64)
        alphas = np.array([g.angle for g in self.left_rotations], dtype=float)
        betas = np.array([g.angle for g in self.right_rotations], dtype=float)
        return pp, qq, alphas, betas


def apply_fasst(kernel: FasstKernel, x, inverse: bool = False):
    """Apply the kernel through its rotation sequences (2J rotations).

    Forward computes S^T x = U V^T x; inverse composes back to the input.
    Accepts a length-n vector or an (n, B) batch of column vectors.
    """
    arr = np.array(x, dtype=float)
    vector = arr.ndim == 1
    if vector:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] != kernel.n:
        raise ValueError(f"input length {arr.shape[0]} does not match kernel dimension {kernel.n}")
    arr = np.ascontiguousarray(arr)
    pp, qq, alphas, betas = kernel._seq
    if inverse:
        rotate_pairs(arr, pp, qq, -alphas, reverse=False)   # U^T
        rotate_pairs(arr, pp, qq, betas, reverse=True)      # V
    else:
        rotate_pairs(arr, pp, qq, -betas, reverse=False)    # V^T
        rotate_pairs(arr, pp, qq, alphas, reverse=True)     # U
    return arr[:, 0] if vector else arr


def to_dense(kernel: FasstKernel) -> np.ndarray:
    """Materialize S = V U^T as a dense orthonormal matrix."""
    return check_orthonormal(apply_fasst(kernel, np.eye(kernel.n), inverse=True))


def cross_covariance(y, x) -> np.ndarray:
    """Cross-covariance Y X^T between coefficient and sample matrices."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.ndim != 2 or y.shape != x.shape:
        raise ValueError("coefficient and sample matrices must share shape (n, m_e)")
    return y @ x.T


def select_pivot(gamma_j, used_pairs) -> tuple[int, int]:
    """Pick the unused pair (p, q), p > q, maximizing |[G^T G]_{pq}|.

    Exact-score ties break lexicographically by (p, q) ascending.
    """
    g = np.asarray(gamma_j, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("expected a square matrix")
    n = g.shape[0]
    scores = np.abs(g.T @ g)
    scores[np.triu_indices(n)] = -1.0
    for p, q in used_pairs:
        if p < q:
            p, q = q, p
        scores[p, q] = -1.0
    best = scores.max()
    if best < 0:
        raise ValueError("all coordinate pairs are used")
    p, q = np.argwhere(scores == best)[0]
    return int(p), int(q)


def _rotate_gamma_step(g, p, q, alpha, beta):
    """In place: g <- G(-alpha) @ g @ G(beta) on the (p, q) plane."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    rp = ca * g[p] - sa * g[q]
    rq = sa * g[p] + ca * g[q]
    g[p] = rp
    g[q] = rq
    cb, sb = math.cos(beta), math.sin(beta)
    cp = cb * g[:, p] - sb * g[:, q]
    cq = sb * g[:, p] + cb * g[:, q]
    g[:, p] = cp
    g[:, q] = cq


def _rotated_gamma(gamma, kernel_or_seq) -> np.ndarray:
    """Compute U^T gamma V from scratch via the rotation sequences."""
    if isinstance(kernel_or_seq, FasstKernel):
        pp, qq, alphas, betas = kernel_or_seq._seq
    else:
        pp, qq, alphas, betas = kernel_or_seq
    out = np.ascontiguousarray(np.array(gamma, dtype=float))
    rotate_pairs(out, pp, qq, -alphas, reverse=False)       # U^T on rows
    t = np.ascontiguousarray(out.T)
    rotate_pairs(t, pp, qq, -betas, reverse=False)          # (.) V via V^T on rows of the transpose
    return np.ascontiguousarray(t.T)


def _offdiag_energy(a) -> float:
    """Sum of squared off-diagonal entries (no sqrt/square roundtrip)."""
    off = np.array(a, dtype=float)
    np.fill_diagonal(off, 0.0)
    return float(np.sum(off * off))


def factorization_error(kernel: FasstKernel, gamma) -> float:
    """Normalized factorization error: off-diagonal energy of U^T gamma V
    over the total energy of gamma."""
    gamma = np.asarray(gamma, dtype=float)
    norm2 = float(np.sum(gamma * gamma))
    if norm2 == 0.0:
        raise ValueError("factorization error is undefined for a zero matrix")
    rotated = _rotated_gamma(gamma, kernel)
    return _offdiag_energy(rotated) / norm2


def factorize_approx(gamma, tau: float, j_max: int, mu: float | None = None) -> FasstKernel:
    """Greedy approximate Givens factorization of a cross-covariance.

    Repeats: rotate the cross-covariance by the accumulated sequences, pick
    the pivot pair, solve its 2x2 SVD, append the rotations. Stops once the
    normalized error e_j drops to tau, after j_max rotations, or when every
    pair has been used. At least one rotation is always placed.

    The rotated matrix is updated incrementally (O(n) per step) and
    recomputed from scratch every 32 steps as a drift guard.
    """
    g0 = np.array(gamma, dtype=float)
    if g0.ndim != 2 or g0.shape[0] != g0.shape[1]:
        raise ValueError("expected a square cross-covariance")
    if not np.all(np.isfinite(g0)):
        raise ValueError("cross-covariance entries must be finite")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    norm2 = float(np.sum(g0 * g0))
    if norm2 == 0.0:
        raise ValueError("cannot factorize a zero cross-covariance")
    n = g0.shape[0]
    cap = min(j_max, n * (n - 1) // 2)

    gj = np.ascontiguousarray(g0.copy())
    used: set[tuple[int, int]] = set()
    left: list[GivensRotation] = []
    right: list[GivensRotation] = []
    e_trace: list[float] = []
    norm = math.sqrt(norm2)
    while True:
        p, q = select_pivot(gj, used)
        sub = np.array([[gj[p, p], gj[p, q]], [gj[q, p], gj[q, q]]])
        alpha, beta, _ = svd_2x2(sub)
        left.append(GivensRotation(p, q, alpha))
        right.append(GivensRotation(p, q, beta))
        used.add((p, q))
        _rotate_gamma_step(gj, p, q, alpha, beta)
        j = len(left)
        if j % _REFRESH_EVERY == 0:
            seq = (np.array([g.p for g in left], dtype=np.int64),
                   np.array([g.q for g in left], dtype=np.int64),
                   np.array([g.angle for g in left], dtype=float),
                   np.array([g.angle for g in right], dtype=float))
            fresh = _rotated_gamma(g0, seq)
            drift = float(np.max(np.abs(fresh - gj)))
            if drift > _REFRESH_TOL * max(norm, 1.0):
                raise AssertionError(f"incremental cross-covariance drifted by {drift:.3e}")
            gj = fresh
        e = _offdiag_energy(gj) / norm2
        e_trace.append(e)
        if e <= tau or j >= cap:
            break
    return FasstKernel(n=n, left_rotations=tuple(left), right_rotations=tuple(right),
                       e_final=e_trace[-1], mu=mu, e_trace=tuple(e_trace))


def fasst_learn(x, mu: float, tau: float, j_max: int, *, init=None,
                max_outer: int = 50, rel_tol: float = 1e-5,
                sot_max_iter: int = 100, sot_eps: float = 1e-6) -> FasstKernel:
    """Learn a rotation-sequence secondary transform by alternating
    minimization with a greedy Givens factorization as the transform step.

    init: None runs a full SOT learn as the starting transform; a
    FasstKernel or dense orthonormal matrix warm-starts instead (used by the
    annealed training driver). Because the factorization step is greedy the
    objective can fluctuate, so the best kernel seen is returned; the outer
    loop stops on relative objective change below rel_tol or after
    max_outer rounds.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected an (n, m_e) sample matrix")
    n = x.shape[0]
    if init is None:
        s_dense = sot_learn(x, mu, max_iter=sot_max_iter, eps=sot_eps).matrix
    elif isinstance(init, FasstKernel):
        s_dense = to_dense(init)
    else:
        s_dense = check_orthonormal(np.asarray(init, dtype=float))
        if s_dense.shape != (n, n):
            raise ValueError("init has the wrong dimension")

    best_kernel: FasstKernel | None = None
    best_obj = math.inf
    obj_trace: list[float] = []
    prev = None
    floor = 1e-12 * max(float(np.sum(x * x)), 1.0)
    for _ in range(max_outer):
        y = hard_threshold(s_dense.T @ x, mu)
        gamma = y @ x.T
        if not np.any(gamma):
            break  # everything thresholds to zero; no transform can help
        kernel = factorize_approx(gamma, tau, j_max, mu=mu)
        s_dense = to_dense(kernel)
        obj = sot_objective(x, s_dense, y, mu)
        obj_trace.append(obj)
        if obj < best_obj:
            best_obj = obj
            best_kernel = kernel
        if obj <= floor or (prev is not None and abs(prev - obj) <= rel_tol * abs(prev)):
            break
        prev = obj
    if best_kernel is None:
        return FasstKernel(n=n, left_rotations=(), right_rotations=(), e_final=0.0,
                           mu=mu, objective_trace=tuple(obj_trace))
    return replace(best_kernel, objective_trace=tuple(obj_trace))
