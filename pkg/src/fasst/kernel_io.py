"""Kernel file format: canonical JSON, one kernel plus its scan order.

Three payload kinds share one container:
  "givens"  rotation-sequence kernels (records {m, n, alpha, beta} in
            application order, m > n)
  "dense"   full orthonormal kernels (KLT, learned sparse transforms)
  "reduced"  row-orthonormal (n_k, n) kernels with coefficient dropping

Serialization is canonical (sorted keys, fixed separators, repr floats), so
write -> read round-trips bit-exactly and identical kernels produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .baselines import ReducedKernel
from .givens_transform import FasstKernel
from .linalg import GivensRotation, check_orthonormal
from .transforms import ScanOrder

KERNEL_FORMAT_VERSION = 1


class KernelFormatError(ValueError):
    """Raised for malformed kernel files or unsupported versions."""


@dataclass
class LoadedKernel:
    secondary: object          # FasstKernel | ReducedKernel | ndarray
    scan: ScanOrder
    meta: dict


def _scan_doc(scan: ScanOrder) -> dict:
    return {
        "block_size": int(scan.block_size),
        "permutation": [int(i) for i in scan.permutation],
        "n_selected": int(scan.n_selected),
    }


def _matrix_doc(matrix: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.asarray(matrix, dtype=float)]


def save_kernel(path, secondary, scan: ScanOrder, *, block_size: int,
                mode_id: int, primary_kind: str, mu: float | None = None,
                tau: float | None = None) -> None:
    doc = {
        "format_version": KERNEL_FORMAT_VERSION,
        "block_size": int(block_size),
        "mode_id": int(mode_id),
        "primary_kind": str(primary_kind),
        "tau": None if tau is None else float(tau),
        "scan": _scan_doc(scan),
    }
    if isinstance(secondary, FasstKernel):
        doc.update({
            "kind": "givens",
            "n": int(secondary.n),
            "J": int(secondary.J),
            "mu": None if secondary.mu is None else float(secondary.mu),
            "e_final": float(secondary.e_final),
            "rotations": [
                {"m": int(gl.p), "n": int(gl.q),
                 "alpha": float(gl.angle), "beta": float(gr.angle)}
                for gl, gr in zip(secondary.left_rotations, secondary.right_rotations)
            ],
        })
    elif isinstance(secondary, ReducedKernel):
        doc.update({
            "kind": "reduced",
            "n": int(secondary.n),
            "n_k": int(secondary.n_k),
            "mu": None if mu is None else float(mu),
            "matrix": _matrix_doc(secondary.matrix),
        })
    else:
        matrix = check_orthonormal(np.asarray(secondary, dtype=float))
        doc.update({
            "kind": "dense",
            "n": int(matrix.shape[0]),
            "mu": None if mu is None else float(mu),
            "matrix": _matrix_doc(matrix),
        })
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"), allow_nan=False)
        fh.write("\n")


def load_kernel(path) -> LoadedKernel:
    try:
        with open(path, encoding="ascii") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise KernelFormatError(f"malformed kernel file: {exc}") from None
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise KernelFormatError("not a kernel file")
    if doc["format_version"] != KERNEL_FORMAT_VERSION:
        raise KernelFormatError(f"unsupported kernel format version {doc['format_version']}")
    try:
        scan = ScanOrder(doc["scan"]["block_size"],
                         np.array(doc["scan"]["permutation"], dtype=np.int64),
                         doc["scan"]["n_selected"])
        kind = doc["kind"]
        if kind == "givens":
            left = tuple(GivensRotation(r["m"], r["n"], r["alpha"]) for r in doc["rotations"])
            right = tuple(GivensRotation(r["m"], r["n"], r["beta"]) for r in doc["rotations"])
            secondary = FasstKernel(n=doc["n"], left_rotations=left, right_rotations=right,
                                    e_final=doc["e_final"], mu=doc["mu"])
        elif kind == "reduced":
            secondary = ReducedKernel(n=doc["n"], n_k=doc["n_k"],
                                      matrix=np.array(doc["matrix"], dtype=float))
        elif kind == "dense":
            secondary = check_orthonormal(np.array(doc["matrix"], dtype=float))
        else:
            raise KernelFormatError(f"unknown kernel kind {kind!r}")
    except (KeyError, TypeError) as exc:
        raise KernelFormatError(f"kernel file missing field: {exc}") from None
    meta = {k: doc.get(k) for k in ("block_size", "mode_id", "primary_kind",
                                    "mu", "tau", "e_final", "J", "n", "kind")}
    return LoadedKernel(secondary=secondary, scan=scan, meta=meta)
