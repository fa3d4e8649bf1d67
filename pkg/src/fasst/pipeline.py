"""Experiment drivers shared by the CLI and the acceptance suite: per-mode
training across both primary transforms, and pooled RD evaluation."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .baselines import klt_gr, klt_learn, lf_sot, lfnst_from_klt
from .codec import (QuantConfig, anneal_train, candidate_set, encode_blocks,
                    fasst_trainer, rdo_cluster, sot_trainer)
from .data import Dataset, split
from .evaluate import PSNR_CAP_DB, PSNR_PEAK, RDCurve, RDPoint
from .givens_transform import fasst_learn
from .kernel_io import load_kernel, save_kernel
from .sot import SotModel, sot_learn
from .transforms import apply_primary, extract_lowfreq, learn_scan_order, primary_kernel

METHODS = ("sot", "fasst", "klt", "lfnst", "lf-sot", "klt-gr")
PRIMARY_KINDS = ("DCT", "ADST")


@dataclass
class TrainedMode:
    mode_id: int
    primary_kind: str
    scan: object
    secondary: object


def _mode_xhat(blocks: np.ndarray, kind: str, block_size: int, n: int):
    """Learn the variance scan and extract the (n, m) low-frequency matrix."""
    kernel = primary_kernel(kind, block_size)
    coeffs = apply_primary(blocks, kernel)
    scan = learn_scan_order(coeffs, n)
    xhat, _ = extract_lowfreq(coeffs, scan)
    return scan, np.ascontiguousarray(xhat.T)


def train_secondary(method: str, xhat: np.ndarray, cfg: dict):
    """Train one secondary transform on an (n, m) coefficient matrix."""
    qp_list = cfg["qp_list"]
    tau, j_max, n_k = cfg["tau"], cfg["j_max"], cfg["n_k"]
    if method == "klt":
        return klt_learn(xhat)
    if method == "lfnst":
        return lfnst_from_klt(klt_learn(xhat), n_k)
    if method == "klt-gr":
        return klt_gr(klt_learn(xhat), tau, j_max)
    if method == "sot":
        return anneal_train({0: xhat}, qp_list, sot_trainer())[0]
    if method == "lf-sot":
        model = anneal_train({0: xhat}, qp_list, sot_trainer())[0]
        return lf_sot(model, n_k)
    if method == "fasst":
        return anneal_train({0: xhat}, qp_list, fasst_trainer(tau, j_max))[0]
    raise ValueError(f"unknown method {method!r} (choose from {METHODS})")


def _cluster_retrainer(method: str, cfg: dict, mu_final: float):
    """Retraining callback for rdo_cluster; tiny clusters keep their kernel."""
    tau, j_max, n_k = cfg["tau"], cfg["j_max"], cfg["n_k"]

    def retrain(cand, xhat):
        if xhat.shape[1] < max(2, xhat.shape[0] // 4):
            return cand.secondary
        if method == "klt":
            return klt_learn(xhat)
        if method == "lfnst":
            return lfnst_from_klt(klt_learn(xhat), n_k)
        if method == "klt-gr":
            return klt_gr(klt_learn(xhat), tau, j_max)
        if method == "sot":
            return sot_learn(xhat, mu_final, init=cand.secondary.matrix
                             if isinstance(cand.secondary, SotModel) else cand.secondary)
        if method == "lf-sot":
            return lf_sot(sot_learn(xhat, mu_final), n_k)
        if method == "fasst":
            return fasst_learn(xhat, mu_final, tau, j_max, init=cand.secondary)
        raise ValueError(f"unknown method {method!r}")

    return retrain


def train_modes(train_set: Dataset, method: str, cfg: dict) -> list[TrainedMode]:
    """Train (mode, primary) secondary transforms on the train split.

    With cluster_iterations > 0, per-block RDO assignment and per-cluster
    retraining refine the kernels at the final (smallest-mu) stage.
    """
    out = []
    for mode_id in train_set.mode_ids():
        blocks = train_set.blocks_for_mode(mode_id)
        per_kind = {}
        for kind in PRIMARY_KINDS:
            scan, xhat = _mode_xhat(blocks, kind, cfg["block_size"], cfg["n"])
            per_kind[kind] = (scan, train_secondary(method, xhat, cfg))
        if cfg["cluster_iterations"] > 0:
            qc = QuantConfig(min(cfg["qp_list"]), lam_override=cfg["lambda_override"],
                             mu_override=cfg["mu_override"])
            cset = candidate_set(primary_kernel("DCT", cfg["block_size"]),
                                 primary_kernel("ADST", cfg["block_size"]),
                                 per_kind["DCT"][0], per_kind["ADST"][0],
                                 sec_dct=per_kind["DCT"][1], sec_adst=per_kind["ADST"][1])
            result = rdo_cluster(blocks, cset, qc, cfg["cluster_iterations"],
                                 _cluster_retrainer(method, cfg, qc.mu))
            for cand in result.candidates.candidates:
                if cand.secondary is not None:
                    per_kind[cand.primary.kind] = (cand.scan, cand.secondary)
        for kind in PRIMARY_KINDS:
            scan, secondary = per_kind[kind]
            out.append(TrainedMode(mode_id, kind, scan, secondary))
    return out


def kernel_filename(method: str, mode_id: int, primary_kind: str) -> str:
    return f"{method}_m{mode_id:02d}_{primary_kind.lower()}.json"


def save_trained(trained: list[TrainedMode], method: str, out_dir, cfg: dict) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for tm in trained:
        secondary = tm.secondary
        mu = None
        if isinstance(secondary, SotModel):
            mu = secondary.mu
            secondary = secondary.matrix
        path = os.path.join(out_dir, kernel_filename(method, tm.mode_id, tm.primary_kind))
        save_kernel(path, secondary, tm.scan, block_size=cfg["block_size"],
                    mode_id=tm.mode_id, primary_kind=tm.primary_kind,
                    mu=mu, tau=cfg["tau"])
        paths.append(path)
    return paths


def _mode_candidate_sets(dataset: Dataset, method: str, cfg: dict,
                         kernels_dir=None, train_set: Dataset | None = None):
    """One CandidateSet per mode: loaded kernels, or primary-only baseline
    with scans learned on the train split."""
    dct = primary_kernel("DCT", cfg["block_size"])
    adst = primary_kernel("ADST", cfg["block_size"])
    csets = {}
    for mode_id in dataset.mode_ids():
        if method == "baseline":
            blocks = (train_set or dataset).blocks_for_mode(mode_id)
            scan_dct, _ = _mode_xhat(blocks, "DCT", cfg["block_size"], cfg["n"])
            scan_adst, _ = _mode_xhat(blocks, "ADST", cfg["block_size"], cfg["n"])
            csets[mode_id] = candidate_set(dct, adst, scan_dct, scan_adst)
        else:
            loaded = {}
            for kind in PRIMARY_KINDS:
                path = os.path.join(kernels_dir, kernel_filename(method, mode_id, kind))
                loaded[kind] = load_kernel(path)
            csets[mode_id] = candidate_set(
                dct, adst, loaded["DCT"].scan, loaded["ADST"].scan,
                sec_dct=loaded["DCT"].secondary, sec_adst=loaded["ADST"].secondary)
    return csets


def evaluate_rd(dataset: Dataset, method: str, cfg: dict,
                kernels_dir=None, label: str | None = None) -> RDCurve:
    """Pooled RD curve over the test split of the dataset.

    Encodes every test block of every mode at every QP; bits and SSE are
    pooled before the rate/PSNR conversion. method "baseline" evaluates the
    primary-only two-candidate set (1 signaling bit).
    """
    if len(cfg["qp_list"]) < 4:
        raise ValueError("need at least 4 QPs")
    train_set, test_set = split(dataset, tuple(cfg["split_ratio"]), dataset.seed)
    csets = _mode_candidate_sets(test_set, method, cfg, kernels_dir, train_set)
    points = []
    for qp in cfg["qp_list"]:
        qc = QuantConfig(qp, lam_override=cfg["lambda_override"],
                         mu_override=cfg["mu_override"])
        total_bits = 0.0
        total_sse = 0.0
        total_blocks = 0
        total_pix = 0
        for mode_id in test_set.mode_ids():
            blocks = test_set.blocks_for_mode(mode_id)
            _, rates, dists = encode_blocks(blocks, csets[mode_id], qc)
            total_bits += float(np.sum(rates))
            total_sse += float(np.sum(dists))
            total_blocks += blocks.shape[0]
            total_pix += blocks.shape[0] * blocks.shape[1] * blocks.shape[2]
        rate = total_bits / total_blocks
        if total_sse <= 0:
            psnr = PSNR_CAP_DB
        else:
            psnr = min(10.0 * math.log10(PSNR_PEAK ** 2 * total_pix / total_sse), PSNR_CAP_DB)
        points.append(RDPoint(qp, rate, psnr))
    points.sort(key=lambda p: p.rate_bits)
    return RDCurve(label if label is not None else method, points)
