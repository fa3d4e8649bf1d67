"""Experiment configuration: canonical JSON with explicit defaults."""

from __future__ import annotations

import json

from .data import ModeSpec, default_modes

DEFAULTS = {
    "seed": 0,
    "block_size": 8,
    "n": 48,                 # primary coefficients fed to the secondary stage
    "n_k": 32,               # retained outputs for reduced kernels
    "qp_list": [26, 27, 28, 29, 30, 31],
    "tau": 1e-6,
    "j_max": 512,
    "blocks_per_mode": 1000,
    "split_ratio": [4, 1],
    "modes": None,           # list of mode dicts; None = 12 default directions
    "mode_weights": None,
    "rho_along": 0.95,
    "rho_across": 0.6,
    "variance": 300.0,
    "cluster_iterations": 0,
    "lambda_override": None,
    "mu_override": None,
    "bd_variant": "cubic",
}


def load_config(path=None) -> dict:
    cfg = dict(DEFAULTS)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
        unknown = set(user) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    n2 = cfg["block_size"] * cfg["block_size"]
    if not 1 <= cfg["n"] <= n2:
        raise ValueError(f"n={cfg['n']} must lie in [1, {n2}] for block size {cfg['block_size']}")
    if not 1 <= cfg["n_k"] <= cfg["n"]:
        raise ValueError("n_k must lie in [1, n]")
    return cfg


def modes_from_config(cfg: dict) -> list[ModeSpec]:
    if cfg["modes"] is None:
        return [ModeSpec(m.mode_id, m.angle_deg, cfg["rho_along"],
                         cfg["rho_across"], cfg["variance"])
                for m in default_modes()]
    return [ModeSpec(mode_id=m["mode_id"], angle_deg=m["angle_deg"],
                     rho_along=m.get("rho_along", cfg["rho_along"]),
                     rho_across=m.get("rho_across", cfg["rho_across"]),
                     variance=m.get("variance", cfg["variance"]))
            for m in cfg["modes"]]
