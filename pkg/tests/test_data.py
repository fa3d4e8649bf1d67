import numpy as np
import pytest

from fasst.data import (Dataset, DatasetFormatError, ModeSpec, default_modes,
                        generate_dataset, mode_covariance, read_dataset, split,
                        synth_residuals, write_dataset)


def test_mode_spec_validation():
    with pytest.raises(ValueError):
        ModeSpec(0, 0.0, rho_along=1.0)
    with pytest.raises(ValueError):
        ModeSpec(0, 180.0)
    with pytest.raises(ValueError):
        ModeSpec(0, 0.0, variance=0.0)


def test_default_modes_cover_principal_directions():
    modes = default_modes()
    assert len(modes) == 12
    angles = {m.angle_deg for m in modes}
    assert {0.0, 90.0, 135.0} <= angles


def test_isotropic_field_rotation_invariant():
    spec = ModeSpec(0, 30.0, rho_along=0.8, rho_across=0.8, variance=1.0)
    blocks = synth_residuals(spec, 10_000, 8, seed=0)
    flat = blocks.reshape(-1, 8, 8)
    h = np.mean(flat[:, :, :-1] * flat[:, :, 1:]) / np.mean(flat**2)
    v = np.mean(flat[:, :-1, :] * flat[:, 1:, :]) / np.mean(flat**2)
    assert abs(h - v) < 0.05


def test_horizontal_mode_lag1_correlation():
    spec = ModeSpec(0, 0.0, rho_along=0.9, rho_across=0.5, variance=2.0)
    blocks = synth_residuals(spec, 10_000, 8, seed=1)
    h = np.mean(blocks[:, :, :-1] * blocks[:, :, 1:]) / np.mean(blocks**2)
    assert abs(h - 0.9) < 0.03


def test_synth_residuals_deterministic():
    spec = ModeSpec(3, 45.0)
    a = synth_residuals(spec, 50, 8, seed=7)
    b = synth_residuals(spec, 50, 8, seed=7)
    assert np.array_equal(a, b)
    c = synth_residuals(spec, 50, 8, seed=8)
    assert not np.array_equal(a, c)


def test_sample_covariance_converges():
    # the 3/sqrt(n) tolerance sits ~2 sigma out for the max entry error, so
    # this is a frozen-seed check rather than a seed-robust one
    spec = ModeSpec(0, 135.0, rho_along=0.9, rho_across=0.6, variance=1.0)
    n_blocks = 10_000
    blocks = synth_residuals(spec, n_blocks, 4, seed=5)
    flat = blocks.reshape(n_blocks, 16)
    sample_cov = flat.T @ flat / n_blocks
    target = mode_covariance(spec, 4)
    assert np.max(np.abs(sample_cov - target)) <= 3.0 / np.sqrt(n_blocks) * spec.variance


def test_mode_covariance_psd():
    for spec in default_modes():
        w = np.linalg.eigvalsh(mode_covariance(spec, 8))
        assert w.min() >= -1e-10 * w.max()


def test_split_ratio_and_disjointness():
    ds = generate_dataset([ModeSpec(0, 0.0)], 100, 4, seed=3)
    train, test = split(ds, (4, 1), seed=3)
    assert len(train) == 80 and len(test) == 20
    train_ids = {id(b) for _, b in train.records}
    test_ids = {id(b) for _, b in test.records}
    assert not train_ids & test_ids


def test_split_deterministic_and_stratified():
    modes = [ModeSpec(0, 0.0), ModeSpec(1, 90.0)]
    ds = generate_dataset(modes, 50, 4, seed=4)
    t1, e1 = split(ds, (4, 1), seed=11)
    t2, e2 = split(ds, (4, 1), seed=11)
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(t1.records, t2.records))
    for mode_id in (0, 1):
        assert sum(1 for m, _ in t1.records if m == mode_id) == 40
        assert sum(1 for m, _ in e1.records if m == mode_id) == 10


def test_split_too_few_blocks():
    ds = Dataset([(0, np.zeros((4, 4)))] * 3, seed=0)
    with pytest.raises(ValueError):
        split(ds, (4, 1), seed=0)


def test_dataset_io_roundtrip(tmp_path):
    ds = generate_dataset([ModeSpec(0, 135.0), ModeSpec(4, 60.0)], 10, 8, seed=5)
    path = tmp_path / "data.bin"
    write_dataset(ds, path)
    back = read_dataset(path)
    assert back.seed == ds.seed and back.split_ratio == ds.split_ratio
    assert len(back) == len(ds)
    for (m1, b1), (m2, b2) in zip(ds.records, back.records):
        assert m1 == m2 and np.array_equal(b1, b2)


def test_dataset_io_empty(tmp_path):
    path = tmp_path / "empty.bin"
    write_dataset(Dataset([], seed=9), path)
    back = read_dataset(path)
    assert len(back) == 0 and back.seed == 9


def test_dataset_io_rewrites_identical_bytes(tmp_path):
    ds = generate_dataset([ModeSpec(0, 135.0)], 5, 4, seed=6)
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    write_dataset(ds, p1)
    write_dataset(ds, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_dataset_io_corrupted_header(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 30)
    with pytest.raises(DatasetFormatError):
        read_dataset(path)


def test_dataset_io_version_mismatch(tmp_path):
    ds = Dataset([], seed=0)
    path = tmp_path / "v.bin"
    write_dataset(ds, path)
    raw = bytearray(path.read_bytes())
    raw[4] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(DatasetFormatError):
        read_dataset(path)


def test_dataset_io_truncated(tmp_path):
    ds = generate_dataset([ModeSpec(0, 135.0)], 3, 4, seed=7)
    path = tmp_path / "t.bin"
    write_dataset(ds, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-10])
    with pytest.raises(DatasetFormatError):
        read_dataset(path)


def test_generate_dataset_with_weights():
    ds = generate_dataset([ModeSpec(0, 0.0), ModeSpec(1, 90.0)], 10, 4, seed=8,
                          weights=[3, 1])
    counts = {m: sum(1 for mid, _ in ds.records if mid == m) for m in (0, 1)}
    assert counts[0] > counts[1] >= 1
