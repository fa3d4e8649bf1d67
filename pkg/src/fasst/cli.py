"""Command-line driver.

Subcommands: gen-data, train, eval, bdrate, complexity, inspect. All
experiment parameters come from a JSON config (see config.DEFAULTS); every
random choice is seeded there, so repeated runs are byte-identical.

CSV schemas:
  rd points   method,qp,rate_bits,psnr_db
  bdrate      method,anchor,percent
  complexity  method,mults,adds,fraction
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .codec import secondary_forward
from .config import load_config, modes_from_config
from .data import generate_dataset, read_dataset, split, write_dataset
from .evaluate import RDCurve, RDPoint, bd_rate, complexity_report, correlation_inspect
from .kernel_io import load_kernel
from .pipeline import (METHODS, PRIMARY_KINDS, _mode_xhat, evaluate_rd,
                       kernel_filename, save_trained, train_modes)
from .transforms import apply_primary, extract_lowfreq, primary_kernel


def _fmt(v) -> str:
    return repr(float(v))


def write_rd_csv(path, curve: RDCurve) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("method,qp,rate_bits,psnr_db\n")
        for p in curve.points:
            fh.write(f"{curve.label},{p.qp},{_fmt(p.rate_bits)},{_fmt(p.psnr_db)}\n")


def read_rd_csv(path) -> RDCurve:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != "method,qp,rate_bits,psnr_db":
            raise ValueError(f"{path}: not an RD points CSV")
        label = ""
        points = []
        for line in fh:
            if not line.strip():
                continue
            label, qp, rate, psnr = line.strip().split(",")
            points.append(RDPoint(int(qp), float(rate), float(psnr)))
    points.sort(key=lambda p: p.rate_bits)
    return RDCurve(label, points)


def _write_matrix_csv(path, matrix) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for row in np.asarray(matrix, dtype=float):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _cmd_gen_data(args) -> int:
    cfg = load_config(args.config)
    modes = modes_from_config(cfg)
    ds = generate_dataset(modes, cfg["blocks_per_mode"], cfg["block_size"],
                          cfg["seed"], weights=cfg["mode_weights"])
    ds.split_ratio = tuple(cfg["split_ratio"])
    write_dataset(ds, args.out)
    print(f"wrote {len(ds)} blocks ({len(modes)} modes, "
          f"{cfg['block_size']}x{cfg['block_size']}) to {args.out}")
    return 0


def _cmd_train(args) -> int:
    cfg = load_config(args.config)
    ds = read_dataset(args.data)
    train_set, _ = split(ds, tuple(cfg["split_ratio"]), ds.seed)
    trained = train_modes(train_set, args.method, cfg)
    paths = save_trained(trained, args.method, args.out_dir, cfg)
    print(f"trained {len(paths)} kernels -> {args.out_dir}")
    return 0


def _cmd_eval(args) -> int:
    cfg = load_config(args.config)
    ds = read_dataset(args.data)
    if args.method != "baseline" and args.kernels is None:
        raise ValueError("eval needs --kernels for any method other than baseline")
    curve = evaluate_rd(ds, args.method, cfg, kernels_dir=args.kernels,
                        label=args.label or args.method)
    write_rd_csv(args.out, curve)
    for p in curve.points:
        print(f"qp={p.qp} rate={p.rate_bits:.2f} bits/block psnr={p.psnr_db:.3f} dB")
    print(f"wrote {args.out}")
    return 0


def _cmd_bdrate(args) -> int:
    test = read_rd_csv(args.test_csv)
    anchor = read_rd_csv(args.anchor_csv)
    pct = bd_rate(test, anchor, variant=args.variant)
    print(f"{pct:.2f}%")
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("method,anchor,percent\n")
            fh.write(f"{test.label},{anchor.label},{_fmt(pct)}\n")
    return 0


def _cmd_complexity(args) -> int:
    J = None
    if args.J is not None:
        parts = [int(p) for p in args.J.split(",")]
        J = parts[0] if len(parts) == 1 else parts
    rep = complexity_report(args.method, args.n, n_k=args.n_k, J=J)
    print(f"{rep.fraction_vs_klt * 100:.1f}%")
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("method,mults,adds,fraction\n")
            fh.write(f"{rep.method},{_fmt(rep.multiplications)},"
                     f"{_fmt(rep.additions)},{_fmt(rep.fraction_vs_klt)}\n")
    return 0


def _cmd_inspect(args) -> int:
    cfg = load_config(args.config)
    ds = read_dataset(args.data)
    train_set, test_set = split(ds, tuple(cfg["split_ratio"]), ds.seed)
    for mode_id in test_set.mode_ids():
        blocks = test_set.blocks_for_mode(mode_id)
        for kind in PRIMARY_KINDS:
            if args.kernels is not None:
                loaded = load_kernel(os.path.join(
                    args.kernels, kernel_filename(args.method, mode_id, kind)))
                scan, secondary = loaded.scan, loaded.secondary
            else:
                # scan from the train split, never from the inspected data
                scan, _ = _mode_xhat(train_set.blocks_for_mode(mode_id), kind,
                                     cfg["block_size"], cfg["n"])
                secondary = None
            coeffs = apply_primary(blocks, primary_kernel(kind, cfg["block_size"]))
            xhat, _ = extract_lowfreq(coeffs, scan)
            samples = np.ascontiguousarray(xhat.T)
            prefix = f"{args.out_prefix}_m{mode_id:02d}_{kind.lower()}"
            corr, summary = correlation_inspect(samples)
            _write_matrix_csv(prefix + "_corr_primary.csv", corr)
            line = (f"mode {mode_id} {kind}: off-diag energy "
                    f"{summary['off_diag_energy']:.4f}")
            if secondary is not None:
                corr_after, summary_after = correlation_inspect(samples, kernel=secondary)
                _write_matrix_csv(prefix + "_corr_secondary.csv", corr_after)
                heat = secondary_forward(secondary, np.eye(cfg["n"]))
                _write_matrix_csv(prefix + "_kernel.csv", heat)
                line += f" -> after secondary {summary_after['off_diag_energy']:.4f}"
            print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fasst",
        description="Learn and evaluate Givens-rotation secondary transforms "
                    "in a desk-scale transform-coding harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize a directional residual dataset")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="train per-mode secondary transforms")
    p.add_argument("--config", default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="emit an RD-curve CSV on the test split")
    p.add_argument("--config", default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--method", required=True, choices=METHODS + ("baseline",))
    p.add_argument("--kernels", default=None)
    p.add_argument("--label", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("bdrate", help="Bjontegaard rate delta between two RD CSVs")
    p.add_argument("test_csv")
    p.add_argument("anchor_csv")
    p.add_argument("--variant", default="cubic", choices=("cubic", "pchip"))
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bdrate)

    p = sub.add_parser("complexity", help="operation counts vs the full KLT")
    p.add_argument("--method", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-k", type=int, default=None)
    p.add_argument("--J", default=None,
                   help="rotation count; comma list averages over modes")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_complexity)

    p = sub.add_parser("inspect", help="correlation matrices and kernel heatmaps")
    p.add_argument("--config", default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--kernels", default=None)
    p.add_argument("--method", default="fasst")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_inspect)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
