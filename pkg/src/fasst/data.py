"""Synthetic directional residual generation, dataset serialization, and
deterministic train/test splitting.

Residual blocks are drawn from a zero-mean Gaussian field whose covariance
decays exponentially along and across a prediction direction, so directional
modes leave exactly the kind of cross-coefficient correlation after a
separable primary transform that secondary transforms exist to remove. The
default correlation/variance parameters come from pilot calibration of this
harness, not from any external dataset.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"FSTD"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModeSpec:
    """Directional residual statistics for one synthetic prediction mode."""

    mode_id: int
    angle_deg: float
    rho_along: float = 0.95
    rho_across: float = 0.6
    variance: float = 300.0

    def __post_init__(self):
        if not (0 < self.rho_along < 1 and 0 < self.rho_across < 1):
            raise ValueError("correlations must lie strictly inside (0, 1)")
        if not 0 <= self.angle_deg < 180:
            raise ValueError("angle must lie in [0, 180)")
        if self.variance <= 0:
            raise ValueError("variance must be positive")


def default_modes() -> list[ModeSpec]:
    """Twelve modes spanning [0, 180), including horizontal (0), vertical
    (90) and the 135-degree diagonal."""
    return [ModeSpec(mode_id=i, angle_deg=15.0 * i) for i in range(12)]


def mode_covariance(spec: ModeSpec, n: int) -> np.ndarray:
    """Pixel-domain covariance of an n x n block under the mode's field.

    C(delta) = variance * rho_along^|delta.u| * rho_across^|delta.u_perp|
    with u the direction unit vector; delta runs over (row, col) offsets,
    positions flattened row-major.
    """
    theta = math.radians(spec.angle_deg)
    u_c, u_r = math.cos(theta), math.sin(theta)
    rows, cols = np.divmod(np.arange(n * n), n)
    dr = rows[:, None] - rows[None, :]
    dc = cols[:, None] - cols[None, :]
    along = np.abs(dc * u_c + dr * u_r)
    across = np.abs(-dc * u_r + dr * u_c)
    cov = spec.variance * spec.rho_along ** along * spec.rho_across ** across
    return 0.5 * (cov + cov.T)


def _covariance_sqrt(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    if w.min() < -1e-10 * max(w.max(), 1.0):
        raise ValueError("mode covariance is not positive semidefinite")
    return v * np.sqrt(np.clip(w, 0.0, None))


def synth_residuals(spec: ModeSpec, n_blocks: int, block_size: int, seed: int) -> np.ndarray:
    """Draw (n_blocks, N, N) residual blocks; bit-reproducible per seed.

    The RNG substream is derived from (seed, mode_id) so per-mode generation
    is independent of scheduling.
    """
    if n_blocks < 1:
        raise ValueError("n_blocks must be positive")
    cov = mode_covariance(spec, block_size)
    root = _covariance_sqrt(cov)
    rng = np.random.default_rng(np.random.SeedSequence([seed, spec.mode_id]))
    z = rng.standard_normal((block_size * block_size, n_blocks))
    return np.ascontiguousarray((root @ z).T.reshape(n_blocks, block_size, block_size))


@dataclass
class Dataset:
    """Residual blocks tagged by mode; records are (mode_id, block)."""

    records: list[tuple[int, np.ndarray]]
    seed: int = 0
    split_ratio: tuple[int, int] = (4, 1)

    def __len__(self) -> int:
        return len(self.records)

    def mode_ids(self) -> list[int]:
        seen = []
        for mode_id, _ in self.records:
            if mode_id not in seen:
                seen.append(mode_id)
        return seen

    def blocks_for_mode(self, mode_id: int) -> np.ndarray:
        blocks = [b for m, b in self.records if m == mode_id]
        if not blocks:
            raise KeyError(f"no blocks for mode {mode_id}")
        return np.stack(blocks)


def generate_dataset(modes, n_blocks_per_mode: int, block_size: int, seed: int,
                     weights=None) -> Dataset:
    """Synthesize a dataset across modes; optional per-mode count weights."""
    modes = list(modes)
    if weights is None:
        counts = [n_blocks_per_mode] * len(modes)
    else:
        if len(weights) != len(modes):
            raise ValueError("weights must match the number of modes")
        total = float(sum(weights))
        counts = [max(1, int(round(n_blocks_per_mode * len(modes) * w / total)))
                  for w in weights]
    records = []
    for spec, count in zip(modes, counts):
        for block in synth_residuals(spec, count, block_size, seed):
            records.append((spec.mode_id, block))
    return Dataset(records, seed=seed)


def split(dataset: Dataset, ratio: tuple[int, int] | None = None,
          seed: int | None = None) -> tuple[Dataset, Dataset]:
    """Per-mode stratified deterministic split.

    Per mode, floor(count * train / (train + test)) blocks go to the train
    side; membership is drawn from an RNG keyed by (seed, mode_id), and the
    original record order is preserved within each side.
    """
    ratio = ratio or dataset.split_ratio
    seed = dataset.seed if seed is None else seed
    r_train, r_test = ratio
    if r_train < 1 or r_test < 1:
        raise ValueError("split ratio parts must be positive")
    denom = r_train + r_test
    train_idx: list[int] = []
    test_idx: list[int] = []
    for mode_id in dataset.mode_ids():
        members = [i for i, (m, _) in enumerate(dataset.records) if m == mode_id]
        if len(members) < denom:
            raise ValueError(f"mode {mode_id} has {len(members)} blocks, "
                             f"fewer than the ratio denominator {denom}")
        rng = np.random.default_rng(np.random.SeedSequence([seed, mode_id, 1]))
        perm = rng.permutation(len(members))
        n_train = len(members) * r_train // denom
        chosen = set(perm[:n_train])
        train_idx.extend(members[i] for i in range(len(members)) if i in chosen)
        test_idx.extend(members[i] for i in range(len(members)) if i not in chosen)
    train = Dataset([dataset.records[i] for i in sorted(train_idx)], dataset.seed, tuple(ratio))
    test = Dataset([dataset.records[i] for i in sorted(test_idx)], dataset.seed, tuple(ratio))
    return train, test


class DatasetFormatError(ValueError):
    """Raised when a dataset file is malformed or has the wrong version."""


def write_dataset(dataset: Dataset, path) -> None:
    """Versioned little-endian binary container; round-trips bit-exactly."""
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<IqIIQ", FORMAT_VERSION, dataset.seed,
                          dataset.split_ratio[0], dataset.split_ratio[1],
                          len(dataset.records)))
    for mode_id, block in dataset.records:
        block = np.asarray(block, dtype="<f8")
        n = block.shape[0]
        if block.shape != (n, n):
            raise ValueError("blocks must be square")
        buf.write(struct.pack("<iI", mode_id, n))
        buf.write(block.tobytes())
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def read_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        data = fh.read()
    view = memoryview(data)
    if len(data) < 4 + struct.calcsize("<IqIIQ") or bytes(view[:4]) != MAGIC:
        raise DatasetFormatError("not a residual dataset file")
    version, seed, r_train, r_test, count = struct.unpack_from("<IqIIQ", data, 4)
    if version != FORMAT_VERSION:
        raise DatasetFormatError(f"unsupported dataset version {version}")
    offset = 4 + struct.calcsize("<IqIIQ")
    records = []
    for _ in range(count):
        if offset + 8 > len(data):
            raise DatasetFormatError("truncated dataset file")
        mode_id, n = struct.unpack_from("<iI", data, offset)
        offset += 8
        nbytes = n * n * 8
        if offset + nbytes > len(data):
            raise DatasetFormatError("truncated dataset file")
        block = np.frombuffer(data, dtype="<f8", count=n * n, offset=offset).reshape(n, n)
        records.append((mode_id, block.copy()))
        offset += nbytes
    if offset != len(data):
        raise DatasetFormatError("trailing bytes after the last record")
    return Dataset(records, seed=seed, split_ratio=(r_train, r_test))
