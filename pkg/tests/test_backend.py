"""Parity between the compiled kernels and the NumPy fallback.

The two backends are expected to agree bit for bit: the extension is built
with FP contraction and sincos merging disabled, so any mismatch here points
at a real build or logic problem.
"""

import numpy as np
import pytest

import fasst
from fasst import _kernels_py

compiled = pytest.importorskip("fasst._kernels")


def test_backend_name_reported():
    assert fasst.BACKEND in ("compiled", "python")


def test_svd2x2_bit_parity():
    rng = np.random.default_rng(0)
    for _ in range(5000):
        a = rng.uniform(-5, 5, 4)
        for ordered in (True, False):
            got = compiled.svd2x2_angles(*a, ordered)
            want = _kernels_py.svd2x2_angles(*a, ordered)
            assert got == tuple(map(float, want))


def test_rotate_pairs_bit_parity():
    rng = np.random.default_rng(1)
    for reverse in (False, True):
        m1 = np.ascontiguousarray(rng.standard_normal((16, 33)))
        m2 = m1.copy()
        pp = rng.integers(1, 16, 300).astype(np.int64)
        qq = np.array([rng.integers(0, p) for p in pp], dtype=np.int64)
        ang = rng.uniform(-3.2, 3.2, 300)
        compiled.rotate_pairs(m1, pp, qq, ang, reverse)
        _kernels_py.rotate_pairs(m2, pp, qq, ang, reverse)
        assert np.array_equal(m1, m2)


def test_kogbetliantz_sweep_bit_parity():
    rng = np.random.default_rng(2)
    a1 = np.ascontiguousarray(rng.standard_normal((14, 14)))
    a2 = a1.copy()
    u1, v1 = np.eye(14), np.eye(14)
    u2, v2 = np.eye(14), np.eye(14)
    for _ in range(6):
        compiled.kogbetliantz_sweep(a1, u1, v1)
        _kernels_py.kogbetliantz_sweep(a2, u2, v2)
    assert np.array_equal(a1, a2)
    assert np.array_equal(u1, u2)
    assert np.array_equal(v1, v2)
