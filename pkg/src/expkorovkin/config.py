"""TOML run configurations.

A run file has the sections below; every key is optional unless noted.

    [experiment]
    family = "masked"            # szasz_shifted | alternating | masked | scaled (required)
    mode = "integral"            # classical | power_series | integral
    method = "borel"             # abel | borel | inline coefficients "1,0,0"
    kernel = "abel"              # integral mode only
    route = "closed"             # closed | quadrature
    functions = ["rational"]     # extra test functions; phi0..phi2 are always run
    horizon = 64                 # classical mode: m = 0..horizon
    workers = 1

    [family]
    scale = [1.0, 0.0]           # scaled family: a_m = scale[m % len(scale)]

    [schedule]
    points = [9, 99, 999]

    [grid]
    cutoff = 10.0
    nodes = 21
    include_infinity = true

    [controls]
    tail_tolerance = 1e-12
    max_terms = 1000000
    abs_tolerance = 1e-9
    max_subdivisions = 2000
    y_cutoff = 500.0

    [rates]
    function = "phi0"
    candidates = ["power(0.25)", "power(1)"]

    [output]
    csv = "run.csv"
    svg = "run.svg"

Function names: phi0, phi1, phi2, rational, rational(a), exp(a), const(c).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .exceptions import ConfigError, DomainError
from .functions import HalfLineGrid, LimitFunction, exp_combination, phi, rational
from .integral import DEFAULT_S_SCHEDULE, QuadratureSpec, preset_abel_kernel
from .korovkin import ExperimentConfig, candidate
from .operators import FAMILY_KINDS, OperatorFamily, SummationControl, family
from .summability import (
    PowerSeriesMethod,
    coefficient_method,
    default_schedule,
    preset_abel,
    preset_borel,
)

__all__ = ["RunSpec", "load_config", "parse_config", "parse_method", "parse_function"]

SCHEMA = {
    "experiment": {"family", "mode", "method", "kernel", "route", "functions", "horizon",
                   "workers"},
    "family": {"scale"},
    "schedule": {"points"},
    "grid": {"cutoff", "nodes", "include_infinity"},
    "controls": {"tail_tolerance", "max_terms", "abs_tolerance", "max_subdivisions",
                 "y_cutoff"},
    "rates": {"function", "candidates"},
    "output": {"csv", "svg"},
}


@dataclass
class RunSpec:
    experiment: ExperimentConfig
    rate_function: LimitFunction | None = None
    candidates: list[str] = field(default_factory=list)
    csv: str | None = None
    svg: str | None = None
    name: str = "run"


def parse_method(text: str) -> PowerSeriesMethod:
    t = str(text).strip().lower()
    if t == "abel":
        return preset_abel()
    if t == "borel":
        return preset_borel()
    try:
        coeffs = [float(c) for c in t.split(",") if c.strip()]
    except ValueError:
        raise ConfigError(f"unknown method {text!r}; use abel, borel or coefficients like 1,0,0")
    try:
        return coefficient_method(coeffs)
    except DomainError as exc:
        raise ConfigError(f"bad coefficient method {text!r}: {exc}") from exc


_PARAM = re.compile(r"^(rational|exp|const)\(([^()]+)\)$")


def parse_function(text: str) -> LimitFunction:
    t = str(text).strip().replace(" ", "")
    if t in ("phi0", "phi1", "phi2"):
        return phi(int(t[-1]))
    if t == "rational":
        return rational()
    m = _PARAM.match(t)
    if m is None:
        raise ConfigError(f"unknown test function {text!r}")
    try:
        a = float(m.group(2))
    except ValueError:
        raise ConfigError(f"bad parameter in {text!r}") from None
    if not math.isfinite(a):
        raise ConfigError(f"bad parameter in {text!r}")
    kind = m.group(1)
    if kind == "const":
        return exp_combination(a, 0.0, 0.0, label=t)
    if kind == "rational":
        if a <= 0:
            raise ConfigError("rational(a) needs a > 0")
        f = rational(a)
        return LimitFunction(f.func, f.limit, label=t, bound=1.0)
    if a < 0:
        raise ConfigError("exp(a) needs a >= 0")
    if a in (0.0, 1.0, 2.0):
        c = [0.0, 0.0, 0.0]
        c[int(a)] = 1.0
        return exp_combination(*c, label=t)
    return LimitFunction(lambda x, a=a: np.exp(-a * np.asarray(x, dtype=float)),
                         0.0 if a > 0 else 1.0, label=t, bound=1.0)


def _check_keys(doc: dict):
    for section, body in doc.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key in body:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")


def _positive(value, key, kind=float):
    try:
        v = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number") from None
    if isinstance(value, bool) or not v > 0 or (kind is float and not math.isfinite(v)):
        raise ConfigError(f"{key} must be positive, got {value!r}")
    return v


def _family(exp: dict, fam_sec: dict) -> OperatorFamily:
    kind = exp.get("family")
    if kind is None:
        raise ConfigError("experiment.family is required")
    if kind not in FAMILY_KINDS:
        raise ConfigError(f"experiment.family must be one of {FAMILY_KINDS}, got {kind!r}")
    if "scale" in fam_sec and kind != "scaled":
        raise ConfigError("family.scale only applies to the scaled family")
    if kind != "scaled" or "scale" not in fam_sec:
        return family(kind)
    scale = fam_sec["scale"]
    vals = scale if isinstance(scale, list) else [scale]
    try:
        arr = np.array([float(v) for v in vals])
    except (TypeError, ValueError):
        raise ConfigError("family.scale must be a number or a list of numbers") from None
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ConfigError("family.scale must be non-empty and finite")
    if np.any(arr < 0):
        raise ConfigError("family.scale entries must be >= 0 for a positive family")
    label = "scaled[" + ",".join(f"{v:g}" for v in arr) + "]"
    return family("scaled", lambda ms: arr[np.asarray(ms) % arr.size],
                  scale_bound=float(np.max(arr)), label=label)


def parse_config(doc: dict, name: str = "run") -> RunSpec:
    """Validate a parsed TOML document and build the run description."""
    _check_keys(doc)
    exp = doc.get("experiment", {})
    fam = _family(exp, doc.get("family", {}))
    mode = exp.get("mode", "power_series")
    if mode not in ("classical", "power_series", "integral"):
        raise ConfigError(f"experiment.mode must be classical, power_series or integral, got {mode!r}")
    method = parse_method(exp.get("method", "borel"))
    kernel = None
    if mode == "integral":
        kname = exp.get("kernel", "abel")
        if kname != "abel":
            raise ConfigError(f"unknown kernel {kname!r}; the shipped kernel is abel")
        kernel = preset_abel_kernel()
    elif "kernel" in exp:
        raise ConfigError("experiment.kernel only applies to integral mode")

    sched = doc.get("schedule", {})
    if "points" in sched:
        pts = sched["points"]
        if not isinstance(pts, list) or not pts:
            raise ConfigError("schedule.points must be a non-empty list")
        try:
            points = tuple(float(p) for p in pts)
        except (TypeError, ValueError):
            raise ConfigError("schedule.points must be numbers") from None
    elif mode == "integral":
        points = DEFAULT_S_SCHEDULE
    else:
        points = default_schedule(method).points

    g = doc.get("grid", {})
    cutoff = _positive(g.get("cutoff", 40.0), "grid.cutoff")
    nodes = int(_positive(g.get("nodes", 2001), "grid.nodes", int))
    if nodes < 2:
        raise ConfigError("grid.nodes must be at least 2")
    inc = g.get("include_infinity", True)
    if not isinstance(inc, bool):
        raise ConfigError("grid.include_infinity must be true or false")
    grid = HalfLineGrid.uniform(cutoff, nodes, inc)

    c = doc.get("controls", {})
    try:
        ctl = SummationControl(
            tail_tolerance=_positive(c.get("tail_tolerance", 1e-12), "controls.tail_tolerance"),
            max_terms=int(_positive(c.get("max_terms", 1_000_000), "controls.max_terms", int)),
        )
        quad = QuadratureSpec(
            y_cutoff=None if "y_cutoff" not in c else _positive(c["y_cutoff"], "controls.y_cutoff"),
            abs_tolerance=_positive(c.get("abs_tolerance", 1e-9), "controls.abs_tolerance"),
            max_subdivisions=int(_positive(c.get("max_subdivisions", 2000),
                                           "controls.max_subdivisions", int)),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    funcs = exp.get("functions", [])
    if not isinstance(funcs, list):
        raise ConfigError("experiment.functions must be a list")
    test_set = tuple(parse_function(f) for f in funcs)
    try:
        cfg = ExperimentConfig(
            family=fam, mode=mode, method=method, kernel=kernel, schedule=points,
            test_set=test_set, grid=grid, controls=ctl, quadrature=quad,
            route=exp.get("route", "closed"),
            horizon=int(_positive(exp.get("horizon", 64), "experiment.horizon", int)),
            workers=int(_positive(exp.get("workers", 1), "experiment.workers", int)),
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    rates = doc.get("rates", {})
    rate_fn = parse_function(rates["function"]) if "function" in rates else None
    cands = rates.get("candidates", [])
    if not isinstance(cands, list):
        raise ConfigError("rates.candidates must be a list")
    for cand in cands:
        try:
            candidate(cand)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    out = doc.get("output", {})
    return RunSpec(cfg, rate_fn, list(cands), out.get("csv"), out.get("svg"), name)


def load_config(path) -> RunSpec:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(doc, path.stem)
