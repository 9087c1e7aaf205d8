"""Command-line surface: simulate | trace | rates | contour.

Every command is driven by a YAML config (all keys defaulted, see
``--print-defaults``) and writes delimited data plus summary JSON into
the output directory, with matplotlib figures rendered alongside unless
``output.figures`` is false. Exit codes: 0 success, 2 config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, figures
from .config import RunConfig, default_config_yaml, load_config
from .dynamics import first_integral, level_seed, simulate
from .exceptions import ConfigError, NumericalError
from .manifold import trace_level_set, uniform_samples
from .rkhs import factorize, project

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _trace(cfg: RunConfig):
    return trace_level_set(cfg.level_c, level_seed(cfg.level_c), cfg.resolution)


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    """One estimator run: trajectory CSV, summary JSON, diagnostic figures."""
    sim = cfg.raw["simulate"]
    sys_cfg = cfg.system_config()
    spec = cfg.kernel_spec(sim["nu"])
    poly = _trace(cfg)
    centers = uniform_samples(poly, sim["N"])
    traj = simulate(sys_cfg, spec, centers)
    f_hat = traj.final_estimate()

    traj_csv = out / "trajectory.csv"
    traj.to_csv(traj_csv)
    phi = first_integral(traj.x)
    summary = {
        "config": cfg.echo(),
        "N": sim["N"],
        "nu": sim["nu"],
        "gamma": sys_cfg.gamma,
        "T": sys_cfg.T,
        "final_sup_err": analysis.sup_error(poly, sys_cfg.f_true, f_hat),
        "final_l2_err": analysis.discrete_sobolev_error(poly, sys_cfg.f_true, f_hat, 0),
        "final_h1_err": analysis.discrete_sobolev_error(poly, sys_cfg.f_true, f_hat, 1),
        "final_state_err": float(np.linalg.norm(traj.x[-1] - traj.xhat[-1])),
        "final_coefficients": traj.a[-1].tolist(),
        "phi_drift": float(np.abs(phi - phi[0]).max()),
    }
    _write_json(out / "simulate_summary.json", summary)
    if cfg.figures:
        figures.save_phase_portrait(out / "phase_portrait.png", poly, traj=traj, centers=centers)
        figures.save_simulation_figure(out / "simulation.png", traj, poly)
        figures.save_estimate_figure(out / "estimate.png", poly, sys_cfg.f_true, f_hat)
    print(
        f"simulate: N={sim['N']} nu={sim['nu']} gamma={sys_cfg.gamma:g} "
        f"-> sup error {summary['final_sup_err']:.3e}, "
        f"Phi drift {summary['phi_drift']:.3e}"
    )
    print(f"wrote {traj_csv}")
    return EXIT_OK


def cmd_trace(cfg: RunConfig, out: Path) -> int:
    """Trace the invariant level curve and export it with arc lengths."""
    poly = _trace(cfg)
    path = out / "manifold.csv"
    poly.to_csv(path)
    if cfg.figures:
        figures.save_trace_figure(out / "manifold.png", poly)
        figures.save_phase_portrait(out / "phase_portrait.png", poly)
    print(
        f"trace: c={cfg.level_c:g} L={poly.total_length:.6f} "
        f"points={len(poly)} closure_gap={poly.closure_gap:.3e}"
    )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_rates(cfg: RunConfig, out: Path) -> int:
    """Convergence study over N and nu; rates CSV, report JSON, figures."""
    study = cfg.raw["study"]
    sys_cfg = cfg.system_config()
    poly = _trace(cfg)
    report = analysis.convergence_study(
        sys_cfg,
        poly,
        study["N_list"],
        cfg.raw["kernel"]["nus"],
        cfg.length_scale,
        fit_window=tuple(study["fit_window"]),
        sampling=study["sampling"],
        N_ref=study["N_ref"] if study["compute_reference"] else None,
        workers=study["workers"],
    )
    report.to_csv(out / "rates.csv")
    _write_json(out / "rates_report.json", report.to_dict(config_echo=cfg.echo()))
    for nu in cfg.raw["kernel"]["nus"]:
        bound = report.bound_exponents[nu]
        slope = report.slope(nu, "sup")
        flag = "ok" if slope <= -bound else "above bound"
        print(f"rates: nu={nu} fitted sup slope {slope:+.3f} vs bound {-bound:+.1f} ({flag})")
        if cfg.figures:
            tag = str(nu).replace(".", "")
            figures.save_rates_figure(out / f"rates_nu{tag}.png", report, nu)
    failures = [r for r in report.records if r.failure is not None]
    for r in failures:
        print(f"rates: record N={r.N} nu={r.nu} failed: {r.failure}")
    print(f"wrote {out / 'rates.csv'}")
    return EXIT_OK


def cmd_contour(cfg: RunConfig, out: Path) -> int:
    """Error field of one run over a plane grid; grid CSV and contour figure."""
    con = cfg.raw["contour"]
    sys_cfg = cfg.system_config()
    spec = cfg.kernel_spec(con["nu"])
    poly = _trace(cfg)
    if con["force_true"]:
        f_hat = sys_cfg.f_true
    else:
        centers = uniform_samples(poly, con["N"])
        f_hat = simulate(sys_cfg, spec, centers).final_estimate()
    x1, x2, err = analysis.error_field(sys_cfg.f_true, f_hat, con["bbox"], con["grid_n"])
    path = out / "error_grid.csv"
    analysis.error_field_csv(path, x1, x2, err)
    if cfg.figures:
        figures.save_contour_figure(out / "error_contour.png", x1, x2, err, poly)
    on_curve = np.abs(
        np.array([float(sys_cfg.f_true(p)) for p in poly.points])
        - (f_hat(poly.points) if not con["force_true"]
           else np.array([float(f_hat(p)) for p in poly.points]))
    ).max()
    print(
        f"contour: N={con['N']} nu={con['nu']} grid max {err.max():.3e}, "
        f"max on manifold {on_curve:.3e}"
    )
    print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "trace": cmd_trace,
    "rates": cmd_rates,
    "contour": cmd_contour,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkhsid",
        description="Adaptive kernel estimation of an ODE nonlinearity "
        "and convergence-rate verification on its invariant manifold.",
    )
    parser.add_argument(
        "--print-defaults",
        action="store_true",
        help="print the canonical default config file and exit",
    )
    sub = parser.add_subparsers(dest="command")
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__.splitlines()[0].lower())
        p.add_argument("--config", default=None, help="YAML config path (defaults apply)")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(default_config_yaml())
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out if args.out is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
