import numpy as np
import pytest

from fasst.baselines import klt_learn
from fasst.codec import candidate_set
from fasst.data import ModeSpec, synth_residuals
from fasst.evaluate import (RDCurve, RDPoint, bd_rate, build_rd_curve,
                            complexity_report, correlation_inspect)
from fasst.givens_transform import factorize_approx
from fasst.transforms import apply_primary, extract_lowfreq, learn_scan_order, primary_kernel


def _curve(rates, psnrs, label="c"):
    pts = [RDPoint(0, r, p) for r, p in zip(rates, psnrs)]
    pts.sort(key=lambda p: p.rate_bits)
    return RDCurve(label, pts)


PSNRS = [30.0, 32.0, 34.5, 36.0, 38.0, 40.0]
RATES = [50.0, 80.0, 130.0, 190.0, 270.0, 380.0]


@pytest.mark.parametrize("variant", ["cubic", "pchip"])
def test_bd_rate_identical_curves_zero(variant):
    a = _curve(RATES, PSNRS)
    assert bd_rate(a, a, variant=variant) == 0.0


@pytest.mark.parametrize("variant", ["cubic", "pchip"])
def test_bd_rate_double_rate(variant):
    a = _curve(RATES, PSNRS, "anchor")
    b = _curve([2 * r for r in RATES], PSNRS, "test")
    assert abs(bd_rate(b, a, variant=variant) - 100.0) <= 0.01


@pytest.mark.parametrize("variant", ["cubic", "pchip"])
def test_bd_rate_half_rate(variant):
    a = _curve(RATES, PSNRS, "anchor")
    b = _curve([0.5 * r for r in RATES], PSNRS, "test")
    assert abs(bd_rate(b, a, variant=variant) + 50.0) <= 0.01


def test_bd_rate_antisymmetry_for_parallel_curves():
    a = _curve(RATES, PSNRS)
    b = _curve([1.37 * r for r in RATES], PSNRS)
    ab = bd_rate(a, b) / 100.0
    ba = bd_rate(b, a) / 100.0
    assert abs((1 + ab) * (1 + ba) - 1.0) <= 1e-12


def test_bd_rate_errors():
    short = _curve(RATES[:3], PSNRS[:3])
    full = _curve(RATES, PSNRS)
    with pytest.raises(ValueError):
        bd_rate(short, full)
    no_overlap = _curve(RATES, [p + 50 for p in PSNRS])
    with pytest.raises(ValueError):
        bd_rate(no_overlap, full)
    flat = _curve([50.0] * 6, PSNRS)
    with pytest.raises(ValueError):
        bd_rate(flat, full)
    with pytest.raises(ValueError):
        bd_rate(full, full, variant="spline")


def test_complexity_paper_fraction_table():
    expected = {64: 11.1, 128: 22.2, 192: 33.3, 256: 44.4, 384: 66.7, 512: 88.9}
    for j, pct in expected.items():
        rep = complexity_report("fasst", 48, J=j)
        assert abs(rep.fraction_vs_klt * 100 - pct) <= 0.05
        assert rep.multiplications == 4 * j and rep.additions == 2 * j
        assert rep.two_pass_multiplications == 8 * j
        assert rep.two_pass_additions == 4 * j


def test_complexity_klt_and_lfnst():
    klt = complexity_report("klt", 48)
    assert klt.multiplications == 48 * 48 and klt.additions == 48 * 47
    assert klt.fraction_vs_klt == 1.0
    lf = complexity_report("lfnst", 48, n_k=32)
    assert lf.multiplications == 1536 and lf.additions == 32 * 47 == 1504
    assert abs(lf.fraction_vs_klt * 100 - 66.67) <= 0.05
    sot = complexity_report("sot", 48)
    assert sot.multiplications == 2304


def test_complexity_mode_adaptive_averages():
    rep = complexity_report("fasst-adaptive", 48, J=[64, 128, 192])
    assert rep.multiplications == 4 * 128.0
    assert rep.additions == 2 * 128.0


def test_complexity_errors():
    with pytest.raises(ValueError):
        complexity_report("lfnst", 48)
    with pytest.raises(ValueError):
        complexity_report("fasst", 48)
    with pytest.raises(ValueError):
        complexity_report("wavelet", 48)


def _tiny_cset():
    dct = primary_kernel("DCT", 4)
    adst = primary_kernel("ADST", 4)
    blocks = synth_residuals(ModeSpec(0, 135.0), 200, 4, seed=0)
    scan_d = learn_scan_order(apply_primary(blocks, dct), 8)
    scan_a = learn_scan_order(apply_primary(blocks, adst), 8)
    return candidate_set(dct, adst, scan_d, scan_a), blocks


def test_build_rd_curve_zero_blocks_caps_psnr():
    cset, _ = _tiny_cset()
    curve = build_rd_curve(np.zeros((10, 4, 4)), cset, [26, 27, 28, 29, 30, 31])
    assert all(p.psnr_db == 99.0 for p in curve.points)


def test_build_rd_curve_six_points_sorted():
    cset, blocks = _tiny_cset()
    curve = build_rd_curve(blocks, cset, [26, 27, 28, 29, 30, 31])
    assert len(curve.points) == 6
    rates = curve.rates()
    assert np.all(np.diff(rates) > 0)
    # coarser QP never increases the rate on this data
    qps = [p.qp for p in curve.points]
    assert qps == sorted(qps, reverse=True)


def test_build_rd_curve_needs_four_qps():
    cset, blocks = _tiny_cset()
    with pytest.raises(ValueError):
        build_rd_curve(blocks, cset, [26, 27])


def test_correlation_inspect_iid_bound():
    rng = np.random.default_rng(1)
    samples = rng.standard_normal((8, 4000))
    corr, summary = correlation_inspect(samples)
    off = corr - np.diag(np.diag(corr))
    assert np.max(np.abs(off)) <= 4.0 / np.sqrt(4000)
    assert summary["zero_variance"] == []


def test_correlation_inspect_klt_decorrelates():
    blocks = synth_residuals(ModeSpec(0, 135.0), 3000, 8, seed=2)
    dct = primary_kernel("DCT", 8)
    coeffs = apply_primary(blocks, dct)
    scan = learn_scan_order(coeffs, 16)
    xhat, _ = extract_lowfreq(coeffs, scan)
    samples = np.ascontiguousarray(xhat.T)
    k = klt_learn(samples)
    _, before = correlation_inspect(samples)
    _, after = correlation_inspect(samples, kernel=k)
    assert after["off_diag_energy"] <= 0.01 * after["diag_energy"]
    assert after["off_diag_energy"] < before["off_diag_energy"]


def test_correlation_inspect_fasst_reduces_offdiag():
    blocks = synth_residuals(ModeSpec(0, 135.0), 2000, 8, seed=3)
    dct = primary_kernel("DCT", 8)
    coeffs = apply_primary(blocks, dct)
    scan = learn_scan_order(coeffs, 16)
    xhat, _ = extract_lowfreq(coeffs, scan)
    samples = np.ascontiguousarray(xhat.T)
    gamma = samples @ samples.T
    kernel = factorize_approx(gamma, tau=0.0, j_max=40)
    _, before = correlation_inspect(samples)
    _, after = correlation_inspect(samples, kernel=kernel)
    assert after["off_diag_energy"] < before["off_diag_energy"]


def test_correlation_inspect_zero_variance_flagged():
    rng = np.random.default_rng(4)
    samples = rng.standard_normal((4, 100))
    samples[2] = 5.0
    corr, summary = correlation_inspect(samples)
    assert summary["zero_variance"] == [2]
    assert np.all(corr[2] == 0.0) and np.all(corr[:, 2] == 0.0)
