"""RD-curve construction, Bjontegaard rate deltas, complexity accounting,
and coefficient-correlation inspection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import CandidateSet, QuantConfig, encode_blocks, secondary_forward

PSNR_CAP_DB = 99.0
PSNR_PEAK = 255.0


@dataclass(frozen=True)
class RDPoint:
    qp: int
    rate_bits: float
    psnr_db: float


@dataclass
class RDCurve:
    label: str
    points: list[RDPoint]

    def rates(self) -> np.ndarray:
        return np.array([p.rate_bits for p in self.points])

    def psnrs(self) -> np.ndarray:
        return np.array([p.psnr_db for p in self.points])


def build_rd_curve(blocks, cset: CandidateSet, qp_list, label: str = "",
                   lam_override=None, mu_override=None) -> RDCurve:
    """Encode every block at every QP; one (rate/block, PSNR) point per QP.

    PSNR uses an 8-bit peak of 255 and is capped at 99 dB for zero SSE.
    Points come back sorted by ascending rate.
    """
    if len(qp_list) < 4:
        raise ValueError("need at least 4 QPs for a usable RD curve")
    blocks = np.asarray(blocks, dtype=float)
    n_pix = blocks.shape[0] * blocks.shape[1] * blocks.shape[2]
    points = []
    for qp in qp_list:
        qc = QuantConfig(qp, lam_override=lam_override, mu_override=mu_override)
        _, rates, dists = encode_blocks(blocks, cset, qc)
        total_sse = float(np.sum(dists))
        rate = float(np.sum(rates)) / blocks.shape[0]
        if total_sse <= 0:
            psnr = PSNR_CAP_DB
        else:
            psnr = min(10.0 * math.log10(PSNR_PEAK ** 2 * n_pix / total_sse), PSNR_CAP_DB)
        points.append(RDPoint(qp, rate, psnr))
    points.sort(key=lambda p: p.rate_bits)
    return RDCurve(label, points)


def _check_curve(curve: RDCurve):
    rates = curve.rates()
    if len(curve.points) < 4:
        raise ValueError("BD-rate needs at least 4 points per curve")
    if np.any(rates <= 0):
        raise ValueError("rates must be positive")
    if np.any(np.diff(rates) <= 0):
        raise ValueError("rates must be strictly increasing")


def _pchip_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Fritsch-Carlson monotone cubic Hermite slopes."""
    h = np.diff(x)
    delta = np.diff(y) / h
    n = len(x)
    m = np.zeros(n)
    for k in range(1, n - 1):
        if delta[k - 1] * delta[k] <= 0:
            m[k] = 0.0
        else:
            w1 = 2 * h[k] + h[k - 1]
            w2 = h[k] + 2 * h[k - 1]
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k])

    def endpoint(h0, h1, d0, d1):
        slope = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1)
        if slope * d0 <= 0:
            return 0.0
        if d0 * d1 < 0 and abs(slope) > 3 * abs(d0):
            return 3 * d0
        return slope

    m[0] = endpoint(h[0], h[1], delta[0], delta[1])
    m[-1] = endpoint(h[-1], h[-2], delta[-1], delta[-2])
    return m


def _pchip_integral(x: np.ndarray, y: np.ndarray, lo: float, hi: float) -> float:
    """Integral of the pchip interpolant of (x, y) over [lo, hi]."""
    m = _pchip_slopes(x, y)
    total = 0.0
    for k in range(len(x) - 1):
        a, b = x[k], x[k + 1]
        seg_lo, seg_hi = max(a, lo), min(b, hi)
        if seg_hi <= seg_lo:
            continue
        h = b - a
        y0, y1, m0, m1 = y[k], y[k + 1], m[k], m[k + 1]
        # Hermite segment as a polynomial in s = (t - a)/h
        c3 = 2 * y0 + h * m0 - 2 * y1 + h * m1
        c2 = -3 * y0 - 2 * h * m0 + 3 * y1 - h * m1
        c1 = h * m0
        c0 = y0
        s0, s1 = (seg_lo - a) / h, (seg_hi - a) / h

        def F(s):
            return h * (c0 * s + c1 * s ** 2 / 2 + c2 * s ** 3 / 3 + c3 * s ** 4 / 4)
        total += F(s1) - F(s0)
    return total


def bd_rate(test_curve: RDCurve, anchor_curve: RDCurve, variant: str = "cubic") -> float:
    """Average percentage rate difference at equal quality (negative saves).

    variant "cubic" fits a cubic polynomial of log-rate against PSNR per
    curve (the classic formulation); "pchip" uses piecewise monotone cubic
    interpolation instead. The difference is integrated over the common
    PSNR interval and converted to percent.
    """
    for curve in (test_curve, anchor_curve):
        _check_curve(curve)
    xs_t, ys_t = test_curve.psnrs(), np.log(test_curve.rates())
    xs_a, ys_a = anchor_curve.psnrs(), np.log(anchor_curve.rates())
    lo = max(xs_t.min(), xs_a.min())
    hi = min(xs_t.max(), xs_a.max())
    if hi <= lo:
        raise ValueError("curves have no overlapping PSNR range")
    if variant == "cubic":
        int_t = np.polyval(np.polyint(np.polyfit(xs_t, ys_t, 3)), [lo, hi])
        int_a = np.polyval(np.polyint(np.polyfit(xs_a, ys_a, 3)), [lo, hi])
        avg_delta = ((int_t[1] - int_t[0]) - (int_a[1] - int_a[0])) / (hi - lo)
    elif variant == "pchip":
        order_t = np.argsort(xs_t)
        order_a = np.argsort(xs_a)
        it = _pchip_integral(xs_t[order_t], ys_t[order_t], lo, hi)
        ia = _pchip_integral(xs_a[order_a], ys_a[order_a], lo, hi)
        avg_delta = (it - ia) / (hi - lo)
    else:
        raise ValueError(f"unknown BD-rate variant {variant!r}")
    return (math.exp(avg_delta) - 1.0) * 100.0


@dataclass(frozen=True)
class ComplexityReport:
    """Multiplication/addition counts per transformed block of length n.

    For rotation-sequence transforms the conventional figures charge one
    rotation pass (4J mults, 2J adds); the two-pass fields give the cost of
    the always-correct U-then-V application actually implemented (8J, 4J).
    """

    method: str
    multiplications: float
    additions: float
    fraction_vs_klt: float
    two_pass_multiplications: float | None = None
    two_pass_additions: float | None = None


def complexity_report(method: str, n: int, n_k: int | None = None,
                      J=None) -> ComplexityReport:
    """Operation counts: KLT/SOT n^2 and n(n-1); reduced kernels n_k*n and
    n_k(n-1); rotation sequences 4J and 2J (averaged over modes when J is a
    list)."""
    key = method.lower()
    if key in ("klt", "sot"):
        mults, adds = float(n * n), float(n * (n - 1))
        two_mults = two_adds = None
    elif key in ("lfnst", "lf-sot", "lfsot"):
        if n_k is None:
            raise ValueError("reduced kernels need n_k")
        mults, adds = float(n_k * n), float(n_k * (n - 1))
        two_mults = two_adds = None
    elif key in ("fasst", "klt-gr", "kltgr", "fasst-adaptive"):
        if J is None:
            raise ValueError("rotation-sequence methods need J")
        j_avg = float(np.mean(J))
        mults, adds = 4.0 * j_avg, 2.0 * j_avg
        two_mults, two_adds = 8.0 * j_avg, 4.0 * j_avg
    else:
        raise ValueError(f"unknown method {method!r}")
    return ComplexityReport(method=method, multiplications=mults, additions=adds,
                            fraction_vs_klt=mults / float(n * n),
                            two_pass_multiplications=two_mults,
                            two_pass_additions=two_adds)


def correlation_inspect(samples, kernel=None):
    """Pearson correlation matrix of coefficients (rows of an (n, m) sample
    matrix), optionally after applying a secondary kernel.

    Zero-variance coefficients get correlation 0 everywhere (their indices
    are reported under 'zero_variance'). Returns (corr, summary) where the
    summary carries off-diagonal and diagonal energies.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] < 2:
        raise ValueError("need an (n, m) sample matrix with m >= 2")
    if kernel is not None:
        samples = secondary_forward(kernel, np.ascontiguousarray(samples))
    centered = samples - samples.mean(axis=1, keepdims=True)
    std = centered.std(axis=1)
    zero_var = np.flatnonzero(std == 0)
    safe = np.where(std == 0, 1.0, std)
    corr = (centered @ centered.T) / samples.shape[1] / np.outer(safe, safe)
    corr[zero_var, :] = 0.0
    corr[:, zero_var] = 0.0
    off = corr.copy()
    np.fill_diagonal(off, 0.0)
    summary = {
        "zero_variance": zero_var.tolist(),
        "off_diag_energy": float(np.sum(off * off)),
        "diag_energy": float(np.sum(np.diag(corr) ** 2)),
    }
    return corr, summary
