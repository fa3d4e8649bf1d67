"""Desk-scale transform-coding harness.

Per-block pipeline: separable primary transform, variance scan, optional
secondary transform on the first n coefficients, uniform quantization of
everything, a deterministic rate model, and rate-distortion-optimal
candidate selection. The tail (positions beyond n) bypasses the secondary
stage and is coded identically for every candidate, so candidates differ
only in how the low-frequency coefficients are represented.

The entropy coder is replaced by a deterministic bit-count model (see
rate_model); comparisons between transforms all share it, which is what the
relative rate-distortion results need.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .baselines import ReducedKernel
from .givens_transform import FasstKernel, apply_fasst, fasst_learn
from .sot import SotModel, sot_learn
from .transforms import PrimaryKernel, ScanOrder, apply_primary, extract_lowfreq, reinsert_lowfreq


@dataclass(frozen=True)
class QuantConfig:
    """QP plus derived quantities, always recomputed from qp.

    q_step = 2^((qp-4)/6), lam = 0.85 * 2^((qp-12)/3), mu = (q_step/2)^2.
    The optional overrides replace the lambda/mu formulas wholesale (an
    experiment-config escape hatch); they never desynchronize q_step.
    """

    qp: int
    lam_override: float | None = None
    mu_override: float | None = None

    @property
    def q_step(self) -> float:
        return 2.0 ** ((self.qp - 4) / 6.0)

    @property
    def lam(self) -> float:
        if self.lam_override is not None:
            return self.lam_override
        return 0.85 * 2.0 ** ((self.qp - 12) / 3.0)

    @property
    def mu(self) -> float:
        if self.mu_override is not None:
            return self.mu_override
        return (self.q_step / 2.0) ** 2


def quantize(coeffs, q_step: float) -> np.ndarray:
    """Uniform quantization, rounding half away from zero."""
    if q_step <= 0:
        raise ValueError("q_step must be positive")
    coeffs = np.asarray(coeffs, dtype=float)
    return (np.sign(coeffs) * np.floor(np.abs(coeffs) / q_step + 0.5)).astype(np.int64)


def dequantize(levels, q_step: float) -> np.ndarray:
    return np.asarray(levels, dtype=float) * q_step


def _rate_bits_batch(levels: np.ndarray) -> np.ndarray:
    """Coefficient-coding bits per row of an integer level matrix.

    Documented formula (all integer-valued):
      ceil(log2(L+1))                 last-significant-position code
                                      (L+1 symbols; "none" signals all zero)
      lastnz + 1                      one significance flag per position up
                                      to and including the last nonzero
      sum over nonzeros of
        2*floor(log2 |v|) + 1         Exp-Golomb order-0 code of |v| - 1
        + 1                           sign bit
    """
    levels = np.asarray(levels)
    if levels.ndim == 1:
        levels = levels[None, :]
    nrows, length = levels.shape
    last_pos_bits = int(np.ceil(np.log2(length + 1))) if length else 0
    nz = levels != 0
    any_nz = nz.any(axis=1)
    lastnz = np.where(any_nz, length - 1 - np.argmax(nz[:, ::-1], axis=1), -1)
    sig_bits = lastnz + 1
    mags = np.abs(levels)
    # floor(log2 m) for m >= 1 via frexp (exact for integers)
    exps = np.frexp(mags.astype(float))[1] - 1
    mag_bits = np.where(nz, 2 * exps + 2, 0).sum(axis=1)
    return (last_pos_bits + sig_bits + mag_bits).astype(float)


def rate_model(levels, signaling_bits: int) -> float:
    """Deterministic bit count for one quantized coefficient vector."""
    return float(signaling_bits + _rate_bits_batch(np.asarray(levels, dtype=np.int64))[0])


def rd_cost(distortion_sse: float, rate_bits: float, lam: float) -> float:
    """Lagrangian cost D + lambda * R."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    return float(distortion_sse + lam * rate_bits)


# --- secondary-kernel dispatch -------------------------------------------

def secondary_output_dim(secondary) -> int:
    if isinstance(secondary, FasstKernel):
        return secondary.n
    if isinstance(secondary, ReducedKernel):
        return secondary.n_k
    if isinstance(secondary, SotModel):
        return secondary.n
    return np.asarray(secondary).shape[0]


def secondary_forward(secondary, x: np.ndarray) -> np.ndarray:
    """Analysis direction on an (n, B) column batch."""
    if isinstance(secondary, FasstKernel):
        return apply_fasst(secondary, x)
    if isinstance(secondary, ReducedKernel):
        return secondary.matrix @ x
    if isinstance(secondary, SotModel):
        return secondary.matrix.T @ x
    return np.asarray(secondary, dtype=float).T @ x


def secondary_inverse(secondary, y: np.ndarray) -> np.ndarray:
    """Synthesis direction; reduced kernels zero-pad the dropped outputs."""
    if isinstance(secondary, FasstKernel):
        return apply_fasst(secondary, y, inverse=True)
    if isinstance(secondary, ReducedKernel):
        return secondary.matrix.T @ y
    if isinstance(secondary, SotModel):
        return secondary.matrix @ y
    return np.asarray(secondary, dtype=float) @ y


# --- candidates and per-block RDO -----------------------------------------

@dataclass(frozen=True)
class TransformCandidate:
    primary: PrimaryKernel
    scan: ScanOrder
    secondary: object | None = None

    @property
    def label(self) -> str:
        return self.primary.kind + ("+ST" if self.secondary is not None else "")


@dataclass
class CandidateSet:
    """Candidates in evaluation order; the order is the RDO tie-break."""

    candidates: list[TransformCandidate]

    @property
    def signaling_bits(self) -> int:
        return 2 if any(c.secondary is not None for c in self.candidates) else 1


def candidate_set(dct: PrimaryKernel, adst: PrimaryKernel,
                  scan_dct: ScanOrder, scan_adst: ScanOrder,
                  sec_dct=None, sec_adst=None) -> CandidateSet:
    """Canonical order: DCT, ADST, then DCT+ST, ADST+ST when present."""
    cands = [TransformCandidate(dct, scan_dct), TransformCandidate(adst, scan_adst)]
    if sec_dct is not None:
        cands.append(TransformCandidate(dct, scan_dct, sec_dct))
    if sec_adst is not None:
        cands.append(TransformCandidate(adst, scan_adst, sec_adst))
    return CandidateSet(cands)


@dataclass(frozen=True)
class TransformChoice:
    primary: str
    secondary_applied: bool
    signaling_bits: int


@dataclass
class BlockResult:
    choice: TransformChoice
    rate_bits: float
    distortion_sse: float
    quantized_levels: np.ndarray = field(repr=False)


def _evaluate_candidate(blocks: np.ndarray, cand: TransformCandidate,
                        qc: QuantConfig, signaling_bits: int):
    """Full encode/decode chain for one candidate over a (B, N, N) batch.

    Returns (rate_bits, distortion_sse, levels); distortion is pixel-domain
    SSE against the input blocks, so dropped coefficients of reduced kernels
    contribute their whole energy.
    """
    coeffs = apply_primary(blocks, cand.primary)
    xhat, tail = extract_lowfreq(coeffs, cand.scan)
    if cand.secondary is None:
        sec_out = xhat
    else:
        sec_out = secondary_forward(cand.secondary, np.ascontiguousarray(xhat.T)).T
    lv_sec = quantize(sec_out, qc.q_step)
    lv_tail = quantize(tail, qc.q_step)
    levels = np.concatenate([lv_sec, lv_tail], axis=-1)
    rate = signaling_bits + _rate_bits_batch(levels)
    deq_sec = dequantize(lv_sec, qc.q_step)
    if cand.secondary is None:
        xhat_rec = deq_sec
    else:
        xhat_rec = secondary_inverse(cand.secondary, np.ascontiguousarray(deq_sec.T)).T
    rec_coeffs = reinsert_lowfreq(xhat_rec, dequantize(lv_tail, qc.q_step), cand.scan)
    rec = apply_primary(rec_coeffs, cand.primary, inverse=True)
    diff = rec - blocks
    dist = np.sum(diff * diff, axis=(-2, -1))
    return rate, dist, levels


def encode_blocks(blocks, cset: CandidateSet, qc: QuantConfig):
    """Vectorized RDO over a (B, N, N) batch.

    Returns (choice_idx, rate_bits, distortion_sse) arrays; ties keep the
    earliest candidate in the set's order.
    """
    blocks = np.asarray(blocks, dtype=float)
    if blocks.ndim == 2:
        blocks = blocks[None]
    sig = cset.signaling_bits
    best_cost = None
    for idx, cand in enumerate(cset.candidates):
        rate, dist, _ = _evaluate_candidate(blocks, cand, qc, sig)
        cost = dist + qc.lam * rate
        if best_cost is None:
            best_cost, best_rate, best_dist = cost, rate, dist
            choice = np.zeros(blocks.shape[0], dtype=np.int64)
        else:
            better = cost < best_cost
            choice[better] = idx
            best_cost = np.where(better, cost, best_cost)
            best_rate = np.where(better, rate, best_rate)
            best_dist = np.where(better, dist, best_dist)
    return choice, best_rate, best_dist


def encode_block_rdo(block, cset: CandidateSet, qc: QuantConfig) -> BlockResult:
    """Encode one block, trying every candidate end to end."""
    block = np.asarray(block, dtype=float)
    if block.ndim != 2:
        raise ValueError("encode_block_rdo expects a single (N, N) block")
    sig = cset.signaling_bits
    best = None
    for cand in cset.candidates:
        rate, dist, levels = _evaluate_candidate(block[None], cand, qc, sig)
        cost = rd_cost(float(dist[0]), float(rate[0]), qc.lam)
        if best is None or cost < best[0]:
            best = (cost, cand, float(rate[0]), float(dist[0]), levels[0])
    _, cand, rate, dist, levels = best
    choice = TransformChoice(cand.primary.kind, cand.secondary is not None, sig)
    return BlockResult(choice, rate, dist, levels)


# --- clustering and annealed training --------------------------------------

@dataclass
class RdoClusterResult:
    assignments: np.ndarray
    subsets: dict[int, np.ndarray]
    cost_trace: list[float]
    candidates: CandidateSet


def rdo_cluster(blocks, cset: CandidateSet, qc: QuantConfig, iterations: int,
                retrain: Callable) -> RdoClusterResult:
    """Alternate per-block RDO assignment with per-cluster retraining.

    retrain(candidate, xhat) receives the (n, m) low-frequency coefficient
    matrix of the blocks assigned to that candidate and returns the new
    secondary kernel. Candidates whose cluster is empty keep their kernel.
    """
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    blocks = np.asarray(blocks, dtype=float)
    cost_trace: list[float] = []
    assignments = None
    for _ in range(iterations):
        assignments, rates, dists = encode_blocks(blocks, cset, qc)
        cost_trace.append(float(np.sum(dists) + qc.lam * np.sum(rates)))
        for idx, cand in enumerate(cset.candidates):
            if cand.secondary is None:
                continue
            members = np.flatnonzero(assignments == idx)
            if members.size == 0:
                continue
            coeffs = apply_primary(blocks[members], cand.primary)
            xhat, _ = extract_lowfreq(coeffs, cand.scan)
            new_secondary = retrain(cand, np.ascontiguousarray(xhat.T))
            cset.candidates[idx] = replace(cand, secondary=new_secondary)
    subsets = {idx: np.flatnonzero(assignments == idx)
               for idx in range(len(cset.candidates))}
    return RdoClusterResult(assignments, subsets, cost_trace, cset)


def anneal_train(xhat_by_mode: Mapping, qp_list: Sequence[int],
                 trainer: Callable) -> dict:
    """Annealed training: largest mu (coarsest QP) first, each stage
    warm-started from the previous stage's kernel.

    trainer(xhat, mu, init) -> model; init is None on the first stage. The
    last stage's kernel is the deployed one per mode.
    """
    if not qp_list:
        raise ValueError("qp_list must be non-empty")
    stages = sorted(qp_list, key=lambda qp: -QuantConfig(qp).mu)
    out = {}
    for mode_key, xhat in xhat_by_mode.items():
        model = None
        for qp in stages:
            model = trainer(xhat, QuantConfig(qp).mu, model)
        out[mode_key] = model
    return out


def sot_trainer(**kwargs) -> Callable:
    """anneal_train adapter for sparse orthonormal transform learning."""
    def train(xhat, mu, init):
        warm = init.matrix if isinstance(init, SotModel) else init
        return sot_learn(xhat, mu, init=warm, **kwargs)
    return train


def fasst_trainer(tau: float, j_max: int, **kwargs) -> Callable:
    """anneal_train adapter for rotation-sequence transform learning."""
    def train(xhat, mu, init):
        return fasst_learn(xhat, mu, tau, j_max, init=init, **kwargs)
    return train
