"""Command-line entry point.

Exit codes: 0 success, 1 a convergence or rate verdict failed, 2 bad
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

import numpy as np

from .config import RunSpec, load_config, parse_method
from .exceptions import ConfigError, DomainError, KorovkinError, NumericalError
from .functions import phi, rational
from .korovkin import (
    holhos_bound_check,
    modulus_hat,
    mu_sup,
    rate_report_integral,
    rate_report_power_series,
    run_experiment,
)
from .report import plot_errors_svg, rate_csv_text, write_error_csv, write_rate_csv
from .summability import ApproachSchedule, default_schedule, regularity_check

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
OUTDIR_ENV = "EXPKOROVKIN_OUTDIR"


def _outdir(arg: str | None) -> Path:
    return Path(arg or os.environ.get(OUTDIR_ENV) or ".")


def _resolve(explicit: str | None, configured: str | None, outdir: Path, default: str) -> Path:
    if explicit:
        return Path(explicit)
    p = Path(configured or default)
    return p if p.is_absolute() else outdir / p


def _fmt(v: float) -> str:
    return "nan" if not math.isfinite(v) else f"{v:.6e}"


def cmd_regularity(args) -> int:
    try:
        method = parse_method(args.method)
        if args.schedule:
            schedule = ApproachSchedule(tuple(float(v) for v in args.schedule.split(",")))
            schedule.check_within(method.radius)
        else:
            schedule = default_schedule(method)
        if args.m_max < 0:
            raise ConfigError("--m-max must be >= 0")
    except (ValueError, KorovkinError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = regularity_check(method, args.m_max, schedule, args.threshold)
    last3 = rep.schedule[-3:]
    print(f"method {rep.method}, threshold {rep.threshold:g}")
    print("m  " + "  ".join(f"y={y:<11.6g}" for y in last3) + "  pass")
    for row in rep.rows:
        cells = "  ".join(f"{r:<13.6e}" for r in row.ratios[-3:])
        print(f"{row.m:<3d}{cells}  {'yes' if row.passed else 'no'}")
    print("regular" if rep.passed else "not regular")
    return EXIT_OK if rep.passed else EXIT_VERDICT


def _load(path) -> RunSpec | int:
    try:
        return load_config(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def cmd_run(args) -> int:
    spec = _load(args.config)
    if isinstance(spec, int):
        return spec
    cfg = spec.experiment
    if args.workers:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    try:
        table = run_experiment(cfg)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _outdir(args.outdir)
    csv_path = write_error_csv(table, _resolve(args.csv, spec.csv, outdir, spec.name + ".csv"))
    svg_path = plot_errors_svg(table, _resolve(args.svg, spec.svg, outdir, spec.name + ".svg"),
                               title=f"{cfg.family.label}, {cfg.mode}")
    print(f"{table.parameter_name:>12s}  " + "  ".join(f"{lab:>13s}" for lab in table.labels))
    for i, p in enumerate(table.parameters):
        print(f"{p:12.6g}  " + "  ".join(f"{_fmt(e):>13s}" for e in table.errors[i]))
    for lab, v in table.verdicts.items():
        print(f"{lab}: {v}")
    print(f"wrote {csv_path} and {svg_path}")
    if table.failed:
        print(f"failed rows at {table.failed}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK if table.all_converging else EXIT_VERDICT


def cmd_rates(args) -> int:
    spec = _load(args.config)
    if isinstance(spec, int):
        return spec
    cfg = spec.experiment
    if not spec.candidates:
        print("config error: rates.candidates is empty", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.mode == "classical":
        print("config error: rate reports need power_series or integral mode", file=sys.stderr)
        return EXIT_CONFIG
    f = spec.rate_function or phi(0)
    try:
        if cfg.mode == "power_series":
            rep = rate_report_power_series(cfg.method, cfg.family, f, spec.candidates,
                                           cfg.schedule, cfg.grid, cfg.controls)
        else:
            rep = rate_report_integral(cfg.kernel, cfg.method, cfg.family, f, spec.candidates,
                                       cfg.schedule, cfg.grid, cfg.controls, cfg.quadrature,
                                       cfg.route)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _outdir(args.outdir)
    path = write_rate_csv(rep, _resolve(args.csv, spec.csv, outdir, spec.name + "_rates.csv"))
    sys.stdout.write(rate_csv_text(rep))
    for lab, v in rep.verdicts.items():
        print(f"{lab}: {v}")
    if not rep.sound:
        print("bound violated: empirical error exceeds the composite bound", file=sys.stderr)
    print(f"wrote {path}")
    return EXIT_OK if rep.passed and rep.sound else EXIT_VERDICT


def _check_bounds() -> bool:
    rep = holhos_bound_check(range(1, 1001))
    print(f"bounds: {rep.checked} comparisons, {len(rep.violations)} violations")
    for v in rep.violations[:10]:
        print(f"  {v[0]} m={v[1]} xi={v[2]:g} excess={v[3]:.3e}")
    return rep.passed


def _check_mu() -> bool:
    xs = np.linspace(0.0, 60.0, 600001)
    ex = np.exp(-xs)
    worst = 0.0
    for t in np.round(np.arange(0.0, 10.0 + 1e-9, 0.1), 10):
        brute = float(np.max((math.exp(-t) - ex) ** 2))
        worst = max(worst, abs(mu_sup(t) - brute))
    print(f"mu: max deviation from the grid sup {worst:.3e} (tolerance 1e-6)")
    return worst < 1e-6


def _check_modulus() -> bool:
    ok = True
    for f in (phi(1), phi(2), rational()):
        for d in (0.1, 0.3, 0.5):
            fast, brute = modulus_hat(f, d), modulus_hat(f, d, brute=True)
            good = abs(fast - brute) < 1e-3
            ok &= good
            print(f"modulus {f.label} delta={d}: fast {fast:.6f} brute {brute:.6f}"
                  f" {'ok' if good else 'MISMATCH'}")
    deltas = np.round(np.arange(0.0, 1.0 + 1e-9, 0.1), 10)
    for f in (phi(0), phi(1), phi(2), rational()):
        vals = [modulus_hat(f, d) for d in deltas]
        mono = vals[0] == 0.0 and all(b >= a for a, b in zip(vals, vals[1:]))
        ok &= mono
        if not mono:
            print(f"modulus {f.label}: not monotone in delta or nonzero at 0")
    return ok


def cmd_check(args) -> int:
    chosen = [n for n in ("bounds", "mu", "modulus") if getattr(args, n)]
    if not chosen:
        chosen = ["bounds", "mu", "modulus"]
    checks = {"bounds": _check_bounds, "mu": _check_mu, "modulus": _check_modulus}
    ok = True
    for name in chosen:
        ok &= checks[name]()
    return EXIT_OK if ok else EXIT_VERDICT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expkorovkin",
        description="Korovkin-type approximation under power-series and integral summability")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("regularity", help="ratio test for a power-series method")
    p.add_argument("--method", required=True, help="abel, borel or coefficients like 1,0,0")
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--schedule", help="comma-separated y values (default: geometric approach)")
    p.add_argument("--threshold", type=float, default=1e-3)
    p.set_defaults(func=cmd_regularity)

    for name, func, helptext in (("run", cmd_run, "run a convergence experiment"),
                                 ("rates", cmd_rates, "rate report with candidate rates")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", help="TOML run file")
        p.add_argument("--csv", help="CSV output path")
        p.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or .)")
        if name == "run":
            p.add_argument("--svg", help="SVG output path")
            p.add_argument("--workers", type=int, help="concurrent schedule rows")
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="inequality, mu and modulus oracles")
    p.add_argument("--bounds", action="store_true")
    p.add_argument("--mu", action="store_true")
    p.add_argument("--modulus", action="store_true")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
