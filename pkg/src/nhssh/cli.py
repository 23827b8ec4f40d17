"""Command line front end: ``nhssh <subcommand> [flags]``.

Precedence for every setting: command-line flag > ``--config`` JSON file >
built-in default.  The seed additionally honours NHSSH_SEED, which replaces
the built-in default but loses to both the config file and the flag.
"""
from __future__ import annotations

import argparse
from dataclasses import asdict, dataclass, fields
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .io import emit
from .lattice import ModelParams, critical_points
from .realspace import ChainSpec, DimensionCapExceeded, DisorderSpec, MissingSide, robustness_trial
from .sweep import (
    ep_trajectories,
    ipr_sweep,
    obc_spectrum_sweep,
    pbc_obc_comparison,
    phase_diagram,
)
from .topology import TopologyError, track_bands, zak_phase

DEFAULT_SEED = 20240611

SUBCOMMANDS = ("bands", "zak", "phase-diagram", "obc", "compare-pbc-obc", "ipr",
               "robustness", "ep-trace", "critical-points")

COLUMNS = {
    "bands": ["k", "band", "re_z", "im_z"],
    "zak": ["theta", "u", "subset", "omega", "winding", "integer_class", "gapless_flag", "u_used"],
    "phase-diagram": ["theta", "u", "label", "min_gap", "winding", "gapless_flag", "in_window"],
    "obc": ["u", "index", "re_z", "im_z", "ipr", "edge_side", "is_zero_mode"],
    "compare-pbc-obc": ["boundary", "index", "re_z", "im_z"],
    "ipr": ["u", "left_zero", "right_zero", "left_nonzero", "right_nonzero"],
    "robustness": ["class", "survival", "reference_ipr", "trials", "sigma", "seed",
                   "match_zero_tol", "match_ipr_fraction"],
    "ep-trace": ["u", "ep1_k", "ep2_k"],
    "critical-points": ["theta", "w1", "w2", "u1c", "um", "u2c"],
}


@dataclass
class RunConfig:
    subcommand: str = "bands"
    w: float = 1.0
    delta: float = 0.3
    theta: float = math.pi / 4
    u: float = 0.5
    n_k: int | None = None          # per subcommand: 512, or 256 for phase-diagram
    n_cells: int = 50
    u_min: float = 0.0
    u_max: float = 4.0
    n_u: int = 101
    theta_min: float = -math.pi
    theta_max: float = math.pi
    n_theta: int = 101
    subset: str = "all"
    sigma: float = 0.2
    trials: int = 20
    seed: int = DEFAULT_SEED
    zero_tol: float = 1e-3
    edge_fraction: float = 0.1
    ipr_floor: float = 0.05
    workers: int = 1
    output: str = "-"
    format: str = "csv"

    def params(self) -> ModelParams:
        return ModelParams(w=self.w, delta=self.delta, theta=self.theta, u=self.u)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_INT_KEYS = {"n_k", "n_cells", "n_u", "n_theta", "trials", "seed", "workers"}
_STR_KEYS = {"subcommand", "subset", "output", "format"}


def _coerce(key, val):
    if val is None:
        return None
    if key in _INT_KEYS:
        if isinstance(val, float) and not val.is_integer():
            raise ValueError(f"{key} must be an integer, got {val}")
        return int(val)
    if key in _STR_KEYS:
        return str(val)
    return float(val)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nhssh", description="Staggered non-Hermitian SSH chain toolkit")
    ap.add_argument("--version", action="version", version=f"nhssh {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    S = argparse.SUPPRESS
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=S, help="JSON file with RunConfig keys")
        p.add_argument("--w", type=float, default=S)
        p.add_argument("--delta", type=float, default=S)
        th = p.add_mutually_exclusive_group()
        th.add_argument("--theta", type=float, default=S, help="radians")
        th.add_argument("--theta-pi", type=float, default=S, dest="theta_pi",
                        help="theta in units of pi (0.25 means pi/4)")
        p.add_argument("--u", type=float, default=S)
        p.add_argument("--n-k", type=int, default=S, dest="n_k")
        p.add_argument("--n-cells", type=int, default=S, dest="n_cells")
        p.add_argument("--u-min", type=float, default=S, dest="u_min")
        p.add_argument("--u-max", type=float, default=S, dest="u_max")
        p.add_argument("--n-u", type=int, default=S, dest="n_u")
        p.add_argument("--theta-min", type=float, default=S, dest="theta_min")
        p.add_argument("--theta-max", type=float, default=S, dest="theta_max")
        p.add_argument("--n-theta", type=int, default=S, dest="n_theta")
        p.add_argument("--subset", choices=["all", "occupied"], default=S)
        p.add_argument("--sigma", type=float, default=S)
        p.add_argument("--trials", type=int, default=S)
        p.add_argument("--seed", type=int, default=S)
        p.add_argument("--zero-tol", type=float, default=S, dest="zero_tol")
        p.add_argument("--edge-fraction", type=float, default=S, dest="edge_fraction")
        p.add_argument("--ipr-floor", type=float, default=S, dest="ipr_floor")
        p.add_argument("--workers", type=int, default=S)
        p.add_argument("-o", "--output", default=S)
        p.add_argument("--format", choices=["csv", "json"], default=S)
    return ap


def _load_config_file(path, parser):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        parser.error(f"--config: cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        parser.error(f"--config: {path} is not valid JSON ({exc})")
    if not isinstance(data, dict):
        parser.error("--config: top level must be an object")
    data = dict(data)
    if "theta_pi" in data:
        if "theta" in data:
            parser.error("--config: give theta or theta_pi, not both")
        data["theta"] = float(data.pop("theta_pi")) * math.pi
    unknown = sorted(set(data) - set(_FIELD_TYPES))
    if unknown:
        parser.error(f"--config: unknown key(s) {', '.join(unknown)}")
    return data


def parse_config(argv=None, environ=None) -> RunConfig:
    """Merge defaults, NHSSH_SEED, the config file and flags into a RunConfig."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    env = os.environ if environ is None else environ
    merged = asdict(RunConfig())
    if env.get("NHSSH_SEED", "").strip():
        try:
            merged["seed"] = int(env["NHSSH_SEED"])
        except ValueError:
            parser.error(f"NHSSH_SEED must be an integer, got {env['NHSSH_SEED']!r}")
    if "config" in ns:
        merged.update(_load_config_file(ns.pop("config"), parser))
    if "theta_pi" in ns:
        ns["theta"] = ns.pop("theta_pi") * math.pi
    merged.update(ns)
    try:
        cfg = RunConfig(**{k: _coerce(k, v) for k, v in merged.items()})
    except (TypeError, ValueError) as exc:
        parser.error(str(exc))
    if cfg.n_k is None:
        cfg.n_k = 256 if cfg.subcommand == "phase-diagram" else 512
    try:
        cfg.params()
    except ValueError as exc:
        parser.error(f"invalid parameters: {exc}")
    if cfg.n_k < 64:
        parser.error("--n-k: n_k >= 64 required")
    if cfg.subcommand == "phase-diagram" and cfg.n_k < 256:
        parser.error("--n-k: phase-diagram needs n_k >= 256")
    if cfg.n_cells < 2:
        parser.error("--n-cells: n_cells >= 2 required")
    if cfg.sigma < 0:
        parser.error("--sigma: sigma >= 0 required")
    if cfg.trials < 1:
        parser.error("--trials: trials >= 1 required")
    if cfg.n_u < 1 or cfg.n_theta < 1:
        parser.error("--n-u / --n-theta must be positive")
    if cfg.u_min < 0 or cfg.u_max < cfg.u_min:
        parser.error("u axis needs 0 <= u_min <= u_max")
    return cfg


# --------------------------------------------------------------- runners

def _u_axis(cfg):
    return np.linspace(cfg.u_min, cfg.u_max, cfg.n_u)


def _detect_kw(cfg):
    return dict(zero_tol=cfg.zero_tol, edge_fraction=cfg.edge_fraction, ipr_floor=cfg.ipr_floor)


def run_bands(cfg):
    """Tracked bands on the uniform grid; `band` is the continued label."""
    bands = track_bands(cfg.params(), cfg.n_k, refine=False)
    for j, k in enumerate(bands.k):
        for n in range(4):
            yield dict(k=float(k), band=n + 1, z=complex(bands.values[j, n]))


def run_zak(cfg):
    p = cfg.params()
    res = zak_phase(track_bands(p, cfg.n_k), cfg.subset)
    yield dict(theta=p.theta, u=p.u, subset=cfg.subset, omega=res.omega, winding=res.winding,
               integer_class=res.integer_class, gapless_flag=res.gapless_flag, u_used=res.u_used)


def run_phase_diagram(cfg):
    th = np.linspace(cfg.theta_min, cfg.theta_max, cfg.n_theta)
    grid = phase_diagram(th, _u_axis(cfg), cfg.n_k, cfg.w, cfg.delta, cfg.workers)
    yield from grid.records()


def run_obc(cfg):
    for u, vals, reports in obc_spectrum_sweep(cfg.theta, _u_axis(cfg), cfg.n_cells, cfg.w, cfg.delta,
                                               cfg.workers, **_detect_kw(cfg)):
        for i, r in enumerate(reports):
            yield dict(u=u, index=i, z=r.eigenvalue, ipr=r.ipr, edge_side=r.edge_side,
                       is_zero_mode=r.is_zero_mode)


def run_compare(cfg):
    obc, pbc, _ = pbc_obc_comparison(cfg.params(), cfg.n_cells)
    for name, vals in (("open", obc), ("periodic", pbc)):
        for i, z in enumerate(vals):
            yield dict(boundary=name, index=i, z=complex(z))


def run_ipr(cfg):
    for row in ipr_sweep(cfg.theta, _u_axis(cfg), cfg.n_cells, cfg.w, cfg.delta, cfg.workers,
                         **_detect_kw(cfg)):
        yield {k.replace("-", "_"): v for k, v in row.items()}


def run_robustness(cfg):
    spec = ChainSpec(cfg.params(), cfg.n_cells)
    d = DisorderSpec(cfg.sigma, cfg.seed, cfg.trials)
    res = robustness_trial(spec, d, workers=cfg.workers, **_detect_kw(cfg))
    for name, frac in res.survival.items():
        yield {"class": name, "survival": frac, "reference_ipr": res.reference[name],
               "trials": cfg.trials, "sigma": cfg.sigma, "seed": cfg.seed,
               "match_zero_tol": res.zero_tol, "match_ipr_fraction": res.ipr_fraction}


def run_ep_trace(cfg):
    t = ep_trajectories(cfg.theta, _u_axis(cfg), cfg.w, cfg.delta)
    for u, a, b in zip(t.u_axis, t.ep1_k, t.ep2_k):
        yield dict(u=float(u), ep1_k=None if np.isnan(a) else float(a),
                   ep2_k=None if np.isnan(b) else float(b))


def run_critical_points(cfg):
    p = cfg.params()
    cp = critical_points(p)
    yield dict(theta=p.theta, w1=p.w1, w2=p.w2, u1c=cp.u1c, um=cp.um, u2c=cp.u2c)


RUNNERS = {
    "bands": run_bands,
    "zak": run_zak,
    "phase-diagram": run_phase_diagram,
    "obc": run_obc,
    "compare-pbc-obc": run_compare,
    "ipr": run_ipr,
    "robustness": run_robustness,
    "ep-trace": run_ep_trace,
    "critical-points": run_critical_points,
}


def main(argv=None) -> int:
    cfg = parse_config(argv)
    try:
        records = list(RUNNERS[cfg.subcommand](cfg))
    except (TopologyError, MissingSide, DimensionCapExceeded) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        print(f"nhssh: {code}: {exc}", file=sys.stderr)
        return 3
    meta = {"config": asdict(cfg), "version": __version__, "seed": cfg.seed}
    try:
        emit(records, cfg.format, cfg.output, COLUMNS[cfg.subcommand], meta)
    except OSError as exc:
        print(f"nhssh: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
