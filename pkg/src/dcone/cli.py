"""Batch front door: subcommand dispatch, config handling, and delimited
output with optional rendered figures.

Subcommands:

  minimize   obstacle-problem solve (restarts + best-energy selection);
             writes the minimizer report JSON and the profile CSV
  folds      single-fold solve plus necessary-condition cross-checks
  sweep      single-fold candidate table over an (alpha, k) range
  recover    the scaled-energy convergence table over an h list
  plot-g     level-function tables g_alpha / gtilde_alpha over (0, pi]

Configuration comes from flags or from a JSON file via --config; flags
override file values.  Every emitted file starts with a header comment line
carrying the tool version and a hash of the effective config, so identical
configurations produce byte-identical outputs.  With --render, each
subcommand also writes a PNG figure next to its delimited output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .energy import report as energy_report
from .folds import (TRIG, NoRoot, plot_g_table, solve_single_fold, sweep)
from .grid import PeriodicGrid
from .recovery import gamma_check
from .solver import (NoConvergence, SolverConfig, check_necessary_conditions,
                     minimize_restarts)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOCONV = 3


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DCONE_THREADS", "1")))
    except ValueError:
        return 1


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _header(cfg: dict) -> str:
    return f"# dcone {__version__} config={_config_hash(cfg)}"


def _write_csv(path: Path, cfg: dict, columns: list[str], rows) -> None:
    lines = [_header(cfg), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_json(path: Path, cfg: dict, payload: dict) -> None:
    payload = {"tool": f"dcone {__version__}", "config_hash": _config_hash(cfg), **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_config(ns: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Merge --config JSON under explicit flags."""
    if not getattr(ns, "config", None):
        return ns
    try:
        file_vals = json.loads(Path(ns.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config file: {exc}")
    defaults = parser.parse_args([ns.command])
    for key, val in file_vals.items():
        key = key.replace("-", "_")
        if not hasattr(ns, key):
            parser.error(f"unknown config key {key!r}")
        # flags left at their default are overridden by the file
        if getattr(ns, key) == getattr(defaults, key, None):
            setattr(ns, key, val)
    return ns


def _outdir(path_str: str) -> Path:
    path = Path(path_str)
    base = path if path.suffix == "" else path.parent
    base.mkdir(parents=True, exist_ok=True)
    if not os.access(base, os.W_OK):
        raise PermissionError(f"output directory {base} not writable")
    return path


# --------------------------------------------------------------------------
# subcommands

def _cmd_minimize(ns) -> int:
    cfg_dict = dict(n=ns.n, seed=ns.seed, restarts=ns.restarts, command="minimize")
    out = _outdir(ns.out)
    solver_cfg = SolverConfig(n=ns.n, seed=ns.seed)
    reports = minimize_restarts(solver_cfg, restarts=ns.restarts, threads=_threads())
    best = reports[0]
    payload = best.as_dict()
    payload["all_energies"] = [r.energy for r in reports]
    payload["all_inits"] = [f"{r.init_label}/{r.seed}" for r in reports]
    _write_json(out, cfg_dict, payload)
    csv_path = out.with_suffix(".w.csv")
    t = best.w.grid.nodes
    _write_csv(csv_path, cfg_dict, ["t", "w"], zip(t, best.w.values))
    if ns.render:
        from .plots import render_profile
        render_profile(best, out.with_suffix(".png"))
    print(f"minimize: best energy {best.energy:.8f} from {best.init_label}/{best.seed}; "
          f"wrote {out} and {csv_path}")
    return EXIT_OK


def _cmd_folds(ns) -> int:
    cfg_dict = dict(n=ns.n, command="folds")
    out = _outdir(ns.out)
    grid = PeriodicGrid(ns.n)
    solutions = solve_single_fold(grid, return_all=True)
    best = solutions[0]
    rep = energy_report(best.candidate.w)
    payload = {
        "lambda": best.lam,
        "alpha": float(np.sqrt(1.0 + best.lam)),
        "half_width": best.z,
        "opening_deg": best.opening_deg,
        "energy": best.candidate.energy,
        "constraint_residual": best.candidate.constraint_residual,
        "c2_jump_max": max(best.candidate.c2_jumps),
        "grid_energy": rep.energy,
        "others": [
            {"lambda": s.lam, "half_width": s.z, "energy": s.candidate.energy,
             "opening_deg": s.opening_deg}
            for s in solutions[1:]
        ],
    }
    _write_json(out, cfg_dict, payload)
    if ns.render:
        from .plots import render_fold
        render_fold(best, out.with_suffix(".png"))
    print(f"folds: lambda={best.lam:.9f} opening={best.opening_deg:.4f} deg "
          f"energy={best.candidate.energy:.8f}; wrote {out}")
    return EXIT_OK


def _cmd_sweep(ns) -> int:
    alphas = np.arange(ns.alpha_min, ns.alpha_max + 0.5 * ns.alpha_step, ns.alpha_step)
    ks = np.arange(ns.k_min, ns.k_max + 0.5 * ns.k_step, ns.k_step)
    cfg_dict = dict(alpha_min=ns.alpha_min, alpha_max=ns.alpha_max,
                    alpha_step=ns.alpha_step, k_min=ns.k_min, k_max=ns.k_max,
                    k_step=ns.k_step, branch=ns.branch, command="sweep")
    out = _outdir(ns.out)
    rows = sweep(alphas, ks, branch=ns.branch)
    _write_csv(out, cfg_dict,
               ["alpha", "k", "branch", "root_index", "z", "energy", "feasible"],
               ((r["alpha"], r["k"], r["branch"], r["root_index"], r["z"],
                 r["energy"], r["feasible"]) for r in rows))
    print(f"sweep: {len(rows)} rows; wrote {out}")
    return EXIT_OK


def _cmd_plot_g(ns) -> int:
    cfg_dict = dict(alpha=ns.alpha, branch=ns.branch, points=ns.points, command="plot-g")
    out = _outdir(ns.out)
    rows = plot_g_table(ns.alpha, branch=ns.branch, points=ns.points)
    _write_csv(out, cfg_dict, ["z", "g_value", "is_pole"], rows)
    if ns.render:
        from .plots import render_g
        render_g(rows, ns.alpha, ns.branch, out.with_suffix(".png"))
    print(f"plot-g: {len(rows)} samples of the {ns.branch} level function "
          f"at alpha={ns.alpha}; wrote {out}")
    return EXIT_OK


def _cmd_recover(ns) -> int:
    h_list = tuple(float(x) for x in ns.h.split(","))
    cfg_dict = dict(n=ns.n, h=list(h_list), profile=ns.profile, command="recover")
    out = _outdir(ns.out)
    grid = PeriodicGrid(ns.n)
    if ns.profile != "single-fold":
        raise ValueError(f"unknown profile {ns.profile!r}")
    sol = solve_single_fold(grid)
    result = gamma_check(sol.candidate.w, h_list=h_list)
    cols = ["h", "n", "E_scaled", "E0", "rel_err", "gap_pre_close", "a_norm",
            "det_jac", "min_gz", "speed_defect"]
    _write_csv(out, cfg_dict, cols,
               ((r.h, r.n, r.E_scaled, r.E0, r.rel_err, r.gap_pre_close,
                 r.a_norm, r.det_jac, r.min_gz, r.speed_defect)
                for r in result.rows))
    summary = {
        "E0": result.E0,
        "gap_slope": result.gap_slope,
        "a_slope": result.a_slope,
        "det_slope": result.det_slope,
        "rel_err_final": result.rows[-1].rel_err,
        "certificates": [
            {"h": r.h, "alpha": r.certificate.alpha, "beta": r.certificate.beta,
             "lip": r.certificate.lip, "contraction": r.certificate.contraction,
             "satisfied": r.certificate.satisfied}
            for r in result.rows
        ],
    }
    _write_json(out.with_suffix(".summary.json"), cfg_dict, summary)
    if ns.render:
        from .plots import render_gamma
        render_gamma(result, out.with_suffix(".png"))
    print(f"recover: rel err {result.rows[-1].rel_err:.3%} at h={h_list[-1]}; "
          f"slopes gap={result.gap_slope:.2f} a={result.a_slope:.2f} "
          f"det={result.det_slope:.2f}; wrote {out}")
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcone",
                                     description="d-cone small-deflection toolkit")
    parser.add_argument("--version", action="version", version=f"dcone {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minimize", help="solve the obstacle problem")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="minimize.json")
    p.add_argument("--config", default=None)
    p.add_argument("--render", action="store_true")
    p.set_defaults(func=_cmd_minimize)

    p = sub.add_parser("folds", help="single-fold solve + condition checks")
    p.add_argument("--n", type=int, default=2048)
    p.add_argument("--out", default="folds.json")
    p.add_argument("--config", default=None)
    p.add_argument("--render", action="store_true")
    p.set_defaults(func=_cmd_folds)

    p = sub.add_parser("sweep", help="alpha/k single-fold candidate table")
    p.add_argument("--alpha-min", type=float, default=2.0)
    p.add_argument("--alpha-max", type=float, default=8.0)
    p.add_argument("--alpha-step", type=float, default=0.5)
    p.add_argument("--k-min", type=float, default=0.0)
    p.add_argument("--k-max", type=float, default=2.0)
    p.add_argument("--k-step", type=float, default=0.5)
    p.add_argument("--branch", choices=["trig", "hyperbolic"], default="trig")
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("recover", help="scaled-energy convergence table")
    p.add_argument("--profile", default="single-fold")
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--h", default="0.2,0.1,0.05,0.025")
    p.add_argument("--out", default="gamma.csv")
    p.add_argument("--config", default=None)
    p.add_argument("--render", action="store_true")
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("plot-g", help="level-function table")
    p.add_argument("--alpha", type=float, default=7.0)
    p.add_argument("--branch", choices=["trig", "hyperbolic"], default="trig")
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--out", default="g.csv")
    p.add_argument("--config", default=None)
    p.add_argument("--render", action="store_true")
    p.set_defaults(func=_cmd_plot_g)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        ns = _load_config(ns, parser)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, matching our validation code
        return int(exc.code) if exc.code else EXIT_OK
    try:
        return ns.func(ns)
    except NoConvergence as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except NoRoot as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (ValueError, PermissionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run())
