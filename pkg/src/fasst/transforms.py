"""Separable primary transforms (DCT-II / DST-VII), variance-driven scan
orders, and low-frequency coefficient extraction for the secondary stage.

Blocks are (N, N) float arrays; batched variants accept (..., N, N).
Coefficient sample matrices follow the column convention: shape (n, m_e),
one training sample per column.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import check_orthonormal

SUPPORTED_SIZES = (4, 8, 16, 32)


def dct2_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II; rows are the cosine basis functions."""
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * j + 1) * k / (2 * n))
    m[0] *= 1.0 / np.sqrt(2.0)
    return m


def dst7_matrix(n: int) -> np.ndarray:
    """Orthonormal DST-VII; rows are the sine basis functions.

    Conventional realization of the ADST used for intra residuals: the first
    row is an increasing ramp, matching residuals that grow away from the
    prediction edge.
    """
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    return 2.0 / np.sqrt(2 * n + 1) * np.sin(np.pi * (2 * j + 1) * (k + 1) / (2 * n + 1))


@dataclass(frozen=True)
class PrimaryKernel:
    """Separable primary transform: kind in {"DCT", "ADST"}, rows = basis."""

    kind: str
    n: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in ("DCT", "ADST"):
            raise ValueError(f"unknown primary kind {self.kind!r}")
        if self.matrix.shape != (self.n, self.n):
            raise ValueError("kernel matrix shape mismatch")
        check_orthonormal(self.matrix)


def primary_kernel(kind: str, n: int) -> PrimaryKernel:
    if n not in SUPPORTED_SIZES:
        raise ValueError(f"block size {n} not supported (choose from {SUPPORTED_SIZES})")
    if kind == "DCT":
        return PrimaryKernel(kind, n, dct2_matrix(n))
    if kind == "ADST":
        return PrimaryKernel(kind, n, dst7_matrix(n))
    raise ValueError(f"unknown primary kind {kind!r}")


def apply_primary(block, kernel: PrimaryKernel, inverse: bool = False):
    """Separable transform: rows and columns through the kernel basis.

    Forward maps a block B to M @ B @ M.T; inverse undoes it exactly (the
    basis is orthonormal). Accepts a single (N, N) block or a batched
    (..., N, N) array.
    """
    block = np.asarray(block, dtype=float)
    if block.shape[-2:] != (kernel.n, kernel.n):
        raise ValueError(f"block shape {block.shape} does not match kernel size {kernel.n}")
    m = kernel.matrix
    if inverse:
        return m.T @ block @ m
    return m @ block @ m.T


@dataclass(frozen=True)
class ScanOrder:
    """Bijective coefficient ordering; the first n_selected positions feed
    the secondary transform."""

    block_size: int
    permutation: np.ndarray = field(repr=False)
    n_selected: int

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        object.__setattr__(self, "permutation", perm)
        n2 = self.block_size * self.block_size
        if perm.shape != (n2,) or not np.array_equal(np.sort(perm), np.arange(n2)):
            raise ValueError("permutation must be a bijection on the block positions")
        if not 0 <= self.n_selected <= n2:
            raise ValueError("n_selected out of range")


def raster_scan(block_size: int, n_selected: int) -> ScanOrder:
    """Raster ordering; useful as a neutral default in tests."""
    return ScanOrder(block_size, np.arange(block_size * block_size), n_selected)


def learn_scan_order(coeff_blocks, n: int) -> ScanOrder:
    """Order coefficient positions by descending sample variance.

    Ties break toward the smaller raster index, so the result is invariant
    to the ordering of the input blocks.
    """
    blocks = np.asarray(coeff_blocks, dtype=float)
    if blocks.ndim != 3 or blocks.shape[0] < 2:
        raise ValueError("need at least two coefficient blocks")
    nside = blocks.shape[1]
    if blocks.shape[2] != nside:
        raise ValueError("blocks must be square")
    if not 0 <= n <= nside * nside:
        raise ValueError("n out of range")
    var = blocks.reshape(blocks.shape[0], -1).var(axis=0)
    perm = np.argsort(-var, kind="stable")
    return ScanOrder(nside, perm, n)


def extract_lowfreq(coeffs, scan: ScanOrder):
    """Split a coefficient block into (selected, tail) along the scan order.

    Returns views into a permuted copy; reinsert_lowfreq inverts exactly.
    Batched input (..., N, N) yields (..., n) and (..., N*N - n).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    n2 = scan.block_size * scan.block_size
    if coeffs.shape[-2:] != (scan.block_size, scan.block_size):
        raise ValueError("coefficient block does not match the scan order")
    flat = coeffs.reshape(*coeffs.shape[:-2], n2)
    permuted = flat[..., scan.permutation]
    return permuted[..., :scan.n_selected], permuted[..., scan.n_selected:]


def reinsert_lowfreq(selected, tail, scan: ScanOrder):
    """Inverse of extract_lowfreq; bit-exact reconstruction."""
    selected = np.asarray(selected, dtype=float)
    tail = np.asarray(tail, dtype=float)
    n2 = scan.block_size * scan.block_size
    if selected.shape[-1] != scan.n_selected or tail.shape[-1] != n2 - scan.n_selected:
        raise ValueError("segment lengths do not match the scan order")
    flat = np.empty(selected.shape[:-1] + (n2,), dtype=float)
    flat[..., scan.permutation[:scan.n_selected]] = selected
    flat[..., scan.permutation[scan.n_selected:]] = tail
    return flat.reshape(*selected.shape[:-1], scan.block_size, scan.block_size)
