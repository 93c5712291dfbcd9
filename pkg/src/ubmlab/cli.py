"""Command-line entry point.

Subcommands map one-to-one onto the experiment runners; every run prints one
summary line per record, writes ``records.csv`` plus a ``config.json`` sidecar
into the output directory, and exits 0 when every recorded bound is
satisfied, 1 when any is violated, 2 on usage errors, 3 on runtime errors.

A flat ``key=value`` config file may supply any flag's value; explicit flags
override the file.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__, experiments

_INT_KEYS = {"steps", "replicas", "seed", "k_max", "atoms", "workers", "grid_points"}
_FLOAT_KEYS = {"t", "delta", "s_scale"}
_LIST_INT_KEYS = {"n"}
_LIST_FLOAT_KEYS = {"t_grid", "x_grid", "r_grid"}
_STR_KEYS = {"integrator", "cost", "out"}
_BOOL_KEYS = {"coupled", "limit"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _LIST_INT_KEYS | _LIST_FLOAT_KEYS | _STR_KEYS | _BOOL_KEYS

SUBCOMMANDS = ("simulate", "rates", "moments", "concentration", "paths", "biane", "tail")


def _int_list(text: str):
    return [int(p) for p in str(text).split(",") if p != ""]


def _float_list(text: str):
    return [float(p) for p in str(text).split(",") if p != ""]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ubmlab",
        description="Monte Carlo experiments for spectral measures of unitary "
                    "Brownian motion.")
    parser.add_argument("--version", action="version", version=f"ubmlab {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    descriptions = {
        "simulate": "endpoint simulation against the exact mean-trace identity",
        "rates": "replica-to-ensemble W1 rate experiment across n",
        "moments": "trace-moment convergence to the limit moments",
        "concentration": "tail of W1 around its mean",
        "paths": "sup over a time horizon of W1 to the limit measure",
        "biane": "decay of the limit measure to uniform",
        "tail": "tail of the geodesic displacement at small times",
    }
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=descriptions[name])
        p.add_argument("--config", dest="config", default=None,
                       help="flat key=value config file; flags override it")
        p.add_argument("--n", type=_int_list, default=None,
                       help="matrix dimension(s), comma separated")
        p.add_argument("--t", type=float, default=None,
                       help="time (for 'paths': the horizon T)")
        p.add_argument("--t-grid", dest="t_grid", type=_float_list, default=None,
                       help="comma-separated list of times")
        p.add_argument("--steps", type=int, default=None,
                       help="integrator step count (default: max(100, 100 t))")
        p.add_argument("--replicas", type=int, default=None,
                       help="Monte Carlo replicas (for 'paths'/'tail': path count)")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--integrator", choices=("euler", "geodesic"), default=None)
        p.add_argument("--cost", choices=("geodesic", "chordal"), default=None,
                       help="transport cost for reporting (geodesic is exact at scale)")
        p.add_argument("--k-max", dest="k_max", type=int, default=None,
                       help="largest moment order")
        p.add_argument("--atoms", type=int, default=None,
                       help="atom count for quantile discretizations")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker threads (results are worker-count independent)")
        if name == "simulate":
            p.add_argument("--coupled", action="store_true", default=None,
                           help="also run the circle x SU(n) coupling agreement check")
        if name == "rates":
            p.add_argument("--limit", action="store_true", default=None,
                           help="also record W1 of the pooled measure to the limit measure")
        if name == "concentration":
            p.add_argument("--x-grid", dest="x_grid", type=_float_list, default=None,
                           help="exceedance offsets x")
        if name == "paths":
            p.add_argument("--grid-points", dest="grid_points", type=int, default=None,
                           help="number of grid times on [0, T]")
        if name == "tail":
            p.add_argument("--delta", type=float, default=None, help="time horizon delta")
            p.add_argument("--r-grid", dest="r_grid", type=_float_list, default=None,
                           help="displacement radii r")
            p.add_argument("--s-scale", dest="s_scale", type=float, default=None,
                           help="slack s as a fraction of r")
            p.add_argument("--grid-points", dest="grid_points", type=int, default=None,
                           help="sub-steps resolving the sup over [0, delta]")
    return parser


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _KNOWN_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = val
    return values


def _coerce(key: str, val):
    if key in _INT_KEYS:
        return int(val)
    if key in _FLOAT_KEYS:
        return float(val)
    if key in _LIST_INT_KEYS:
        return _int_list(val)
    if key in _LIST_FLOAT_KEYS:
        return _float_list(val)
    if key in _BOOL_KEYS:
        return str(val).strip().lower() in ("1", "true", "yes", "on")
    return str(val)


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = {}
    file_values = _read_config_file(args.config) if args.config else {}
    for key, val in file_values.items():
        cfg[key] = _coerce(key, val)
    for key, val in vars(args).items():
        if key in ("config", "subcommand"):
            continue
        if val is not None:
            cfg[key] = val
    return cfg


def _get(cfg: dict, key: str, default):
    return cfg[key] if cfg.get(key) is not None else default


def _dispatch(sub: str, cfg: dict) -> list:
    seed = _get(cfg, "seed", 0)
    workers = _get(cfg, "workers", 1)
    integ = {"euler": "euler_projected", "geodesic": "geodesic"}[_get(cfg, "integrator", "geodesic")]
    if sub == "simulate":
        t_list = _get(cfg, "t_grid", None) or [_get(cfg, "t", 1.0)]
        records = experiments.run_exact_mean(
            _get(cfg, "n", [8]), t_list, replicas=_get(cfg, "replicas", 1000),
            seed=seed, steps=cfg.get("steps"), integrator=integ, workers=workers)
        if cfg.get("coupled"):
            records += experiments.run_coupling_check(
                n=_get(cfg, "n", [8])[0], t_list=t_list,
                replicas=_get(cfg, "replicas", 1000), seed=seed, workers=workers)
        return records
    if sub == "rates":
        t_list = _get(cfg, "t_grid", None) or [_get(cfg, "t", 1.0)]
        n_list = _get(cfg, "n", [8, 16, 32])
        records = experiments.run_rate_avg_to_avg(
            n_list, t_list, replicas=_get(cfg, "replicas", 500), seed=seed,
            workers=workers)
        if cfg.get("limit"):
            records += experiments.run_avg_to_limit(
                n_list, t_list, replicas=_get(cfg, "replicas", 500), seed=seed,
                m_atoms=_get(cfg, "atoms", 4096), workers=workers)
        return records
    if sub == "moments":
        return experiments.run_moment_convergence(
            _get(cfg, "n", [16]), t=_get(cfg, "t", 1.0), k_max=_get(cfg, "k_max", 4),
            replicas=_get(cfg, "replicas", 4000), seed=seed, workers=workers)
    if sub == "concentration":
        return experiments.run_concentration_tail(
            n=_get(cfg, "n", [16])[0], t=_get(cfg, "t", 1.0),
            replicas=_get(cfg, "replicas", 2000),
            x_grid=_get(cfg, "x_grid", [0.05, 0.1, 0.2]), seed=seed, workers=workers)
    if sub == "paths":
        return experiments.run_path_sup(
            _get(cfg, "n", [16, 64]), t_horizon=_get(cfg, "t", 4.0),
            grid_points=_get(cfg, "grid_points", 100),
            paths=_get(cfg, "replicas", 20), seed=seed,
            m_atoms=_get(cfg, "atoms", 1024), workers=workers)
    if sub == "biane":
        t_list = _get(cfg, "t_grid", None) or [_get(cfg, "t", 8.0)]
        if len(t_list) == 1 and cfg.get("t_grid") is None and cfg.get("t") is None:
            t_list = [4.0, 6.0, 8.0, 10.0, 16.0]
        return experiments.run_limit_to_uniform(
            t_list, m_atoms=_get(cfg, "atoms", 4096), seed=seed)
    if sub == "tail":
        return experiments.run_bm_tail(
            n=_get(cfg, "n", [4])[0], delta=_get(cfg, "delta", 0.01),
            r_grid=_get(cfg, "r_grid", [2.0]), s_scale=_get(cfg, "s_scale", 0.5),
            paths=_get(cfg, "replicas", 2000),
            substeps=_get(cfg, "grid_points", 50), seed=seed, workers=workers)
    raise ValueError(f"unknown subcommand {sub!r}")  # pragma: no cover


def run(subcommand: str, cfg: dict) -> int:
    """Execute one subcommand; returns the process exit code."""
    out_dir = _get(cfg, "out", "ubmlab_results")
    try:
        records = _dispatch(subcommand, cfg)
        for rec in records:
            print(experiments.format_record(rec))
        os.makedirs(out_dir, exist_ok=True)
        experiments.write_records_csv(records, os.path.join(out_dir, "records.csv"))
        sidecar = {"subcommand": subcommand, "version": __version__}
        sidecar.update({k: cfg[k] for k in sorted(cfg)})
        experiments.write_config_json(sidecar, os.path.join(out_dir, "config.json"))
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0 if experiments.all_bounds_satisfied(records) else 1


def parse_args(argv=None) -> tuple:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))  # exits 2
    return args.subcommand, cfg


def main(argv=None) -> int:
    subcommand, cfg = parse_args(argv)
    return run(subcommand, cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
