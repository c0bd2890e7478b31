"""Convergence experiments, the exponential modulus, rate reports and bound checks."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .exceptions import DomainError, NumericalError
from .functions import INF, HalfLineGrid, LimitFunction, default_grid, phi, sup_norm
from .integral import (
    DEFAULT_QUADRATURE,
    IntegralKernel,
    QuadratureSpec,
    closed_form_available,
    f_operator_closed_many,
    f_operator_quadrature_many,
)
from .operators import (
    DEFAULT_CONTROL,
    OperatorFamily,
    SummationControl,
    family_values,
)
from .summability import (
    PowerSeriesMethod,
    preset_abel,
    ps_transform_operator_grid,
    ps_transform_result,
)

__all__ = [
    "ExperimentConfig",
    "ErrorTable",
    "RateReport",
    "BoundReport",
    "MODES",
    "run_experiment",
    "converging",
    "modulus_hat",
    "mu_sup",
    "mu_function",
    "beta",
    "eth",
    "holhos_bound_check",
    "rate_report_power_series",
    "rate_report_integral",
    "candidate",
    "ERROR_FLOOR",
]

MODES = ("classical", "power_series", "integral")
ERROR_FLOOR = 1e-9


def converging(errors: Sequence[float], floor: float = ERROR_FLOOR) -> bool:
    """Finite-schedule surrogate for error -> 0.

    True when the final error is at the floor, or when the last three errors
    strictly decrease and the final one is below 10 * sqrt(first error).
    """
    e = [float(v) for v in errors]
    if not e or any(not math.isfinite(v) for v in e[-3:]):
        return False
    if e[-1] <= floor:
        return True
    tail = e[-3:]
    if len(tail) < 3 or not all(b < a for a, b in zip(tail, tail[1:])):
        return False
    return e[-1] < 10.0 * math.sqrt(e[0])


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One convergence experiment.

    ``schedule`` holds y values (power_series), s values (integral) or is
    ignored in classical mode, which runs m = 0..horizon.
    """

    family: OperatorFamily
    mode: str = "power_series"
    method: PowerSeriesMethod | None = None
    kernel: IntegralKernel | None = None
    schedule: tuple[float, ...] = ()
    test_set: tuple[LimitFunction, ...] = ()
    grid: HalfLineGrid = field(default_factory=default_grid)
    controls: SummationControl = DEFAULT_CONTROL
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE
    route: str = "closed"
    horizon: int = 64
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "classical":
            if self.method is None:
                raise DomainError(f"{self.mode} mode needs a power-series method")
            if not self.schedule:
                raise DomainError("schedule must be non-empty")
            pts = tuple(float(p) for p in self.schedule)
            if any(b <= a for a, b in zip(pts, pts[1:])):
                raise DomainError("schedule must be strictly increasing")
            object.__setattr__(self, "schedule", pts)
        if self.mode == "power_series" and not all(0 < p < self.method.radius for p in self.schedule):
            raise DomainError("power-series schedule must lie in (0, R)")
        if self.mode == "integral":
            if self.kernel is None:
                raise DomainError("integral mode needs a kernel")
            if self.route not in ("closed", "quadrature"):
                raise DomainError("route must be 'closed' or 'quadrature'")
            if self.route == "closed" and not closed_form_available(self.kernel, self.method):
                raise DomainError("the closed route needs the Abel kernel with the Borel method")
            if any(s < 0 for s in self.schedule):
                raise DomainError("s-schedule must be non-negative")
        if self.horizon < 2:
            raise DomainError("horizon must be at least 2")
        # the exponential test functions are always part of the test set
        labels = {f.label for f in self.test_set}
        extra = tuple(phi(nu) for nu in (0, 1, 2) if f"phi{nu}" not in labels)
        object.__setattr__(self, "test_set", extra + tuple(self.test_set))

    @property
    def parameters(self) -> tuple[float, ...]:
        if self.mode == "classical":
            return tuple(float(m) for m in range(int(self.horizon) + 1))
        return self.schedule

    @property
    def parameter_name(self) -> str:
        return {"classical": "m", "power_series": "y", "integral": "s"}[self.mode]

    @property
    def radius(self) -> float:
        if self.mode == "power_series":
            return self.method.radius
        return math.inf


@dataclass
class ErrorTable:
    """Sup-norm errors, rows indexed by parameter and columns by function label."""

    parameters: list[float]
    labels: list[str]
    errors: np.ndarray
    verdicts: dict[str, str]
    parameter_name: str = "p"
    radius: float = math.inf
    failed: list[float] = field(default_factory=list)

    def column(self, label: str) -> np.ndarray:
        return self.errors[:, self.labels.index(label)]

    def error(self, parameter: float, label: str) -> float:
        return float(self.errors[self.parameters.index(parameter), self.labels.index(label)])

    @property
    def all_converging(self) -> bool:
        return all(v == "converging" for v in self.verdicts.values())


def _grid_targets(f: LimitFunction, grid: HalfLineGrid) -> np.ndarray:
    vals = np.asarray(f(grid.nodes), dtype=float)
    if grid.include_infinity:
        vals = np.append(vals, float(f.limit))
    return vals


def _operator_on_grid(cfg: ExperimentConfig, p: float, f: LimitFunction) -> np.ndarray:
    pts = cfg.grid.points
    if cfg.mode == "power_series":
        return ps_transform_operator_grid(cfg.method, cfg.family, f, p, pts, cfg.controls)
    if cfg.route == "closed":
        return f_operator_closed_many(cfg.family, p, f, pts, cfg.controls)
    return f_operator_quadrature_many(cfg.kernel, cfg.method, cfg.family, p, f, pts,
                                      cfg.quadrature, cfg.controls)


def _row(cfg: ExperimentConfig, p: float) -> tuple[np.ndarray, bool]:
    out = np.full(len(cfg.test_set), np.nan)
    ok = True
    for j, f in enumerate(cfg.test_set):
        try:
            vals = _operator_on_grid(cfg, p, f)
            err = float(np.max(np.abs(vals - _grid_targets(f, cfg.grid))))
            if not math.isfinite(err):
                raise NumericalError("non-finite error")
            out[j] = err
        except NumericalError:
            ok = False
    return out, ok


def _classical(cfg: ExperimentConfig) -> tuple[np.ndarray, list[float]]:
    ms = np.arange(int(cfg.horizon) + 1)
    errs = np.zeros((ms.size, len(cfg.test_set)))
    failed = np.zeros(ms.size, dtype=bool)
    for j, f in enumerate(cfg.test_set):
        for xi in cfg.grid.points:
            target = float(f.limit) if xi is INF else float(f(xi))
            try:
                vals = family_values(cfg.family, ms, f, xi, cfg.controls)
            except NumericalError:
                failed[:] = True
                errs[:, j] = np.nan
                break
            errs[:, j] = np.maximum(errs[:, j], np.abs(vals - target))
    return errs, [float(m) for m in ms[failed]]


def run_experiment(cfg: ExperimentConfig) -> ErrorTable:
    """Sup errors ||T_p f - f|| over the grid for each parameter and test function.

    Rows that hit a numerical failure are kept with NaN errors and listed in
    ``failed``; the run itself carries on.
    """
    params = list(cfg.parameters)
    if cfg.mode == "classical":
        errs, failed = _classical(cfg)
    else:
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                rows = list(pool.map(lambda p: _row(cfg, p), params))
        else:
            rows = [_row(cfg, p) for p in params]
        errs = np.array([r[0] for r in rows]).reshape(len(params), len(cfg.test_set))
        failed = [p for p, r in zip(params, rows) if not r[1]]
    labels = [f.label for f in cfg.test_set]
    verdicts = {lab: ("converging" if converging(errs[:, j]) else "not-converging")
                for j, lab in enumerate(labels)}
    return ErrorTable(params, labels, errs, verdicts, cfg.parameter_name, cfg.radius, failed)


# exponential modulus of continuity

_FAST_POINTS = 4001
_BRUTE_POINTS = 401


def _g_values(f: LimitFunction, n: int) -> np.ndarray:
    u = np.linspace(0.0, 1.0, n)
    g = np.empty(n)
    g[0] = float(f.limit)
    g[1:] = np.asarray(f(-np.log(u[1:])), dtype=float)
    return g


def modulus_hat(f: LimitFunction, delta: float, brute: bool = False) -> float:
    """sup |f(t) - f(x)| over |e^{-t} - e^{-x}| <= delta.

    With g(u) = f(-ln u) and g(0) the limit at infinity this is the ordinary
    modulus of g on [0, 1].  The fast path takes max - min over sliding
    windows of a 4001-point u-grid; ``brute`` compares all pairs of a
    401-point grid.
    """
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta}")
    if brute:
        u = np.linspace(0.0, 1.0, _BRUTE_POINTS)
        g = _g_values(f, _BRUTE_POINTS)
        close = np.abs(u[:, None] - u[None, :]) <= delta + 1e-12
        return float(np.max(np.where(close, np.abs(g[:, None] - g[None, :]), 0.0)))
    g = _g_values(f, _FAST_POINTS)
    h = 1.0 / (_FAST_POINTS - 1)
    w = int(math.floor(delta / h + 1e-9))
    if w == 0:
        return 0.0
    size = w + 1
    hi = maximum_filter1d(g, size=size, mode="nearest")
    lo = minimum_filter1d(g, size=size, mode="nearest")
    return float(np.max(hi - lo))


def mu_sup(t: float) -> float:
    """sup over x >= 0 of (e^{-t} - e^{-x})^2 = max(e^{-2t}, (1 - e^{-t})^2)."""
    t = float(t)
    if not t >= 0:
        raise DomainError("t must be >= 0")
    return max(math.exp(-2.0 * t), math.expm1(-t) ** 2)


def mu_function() -> LimitFunction:
    """mu as a LimitFunction; bounded by 1 with limit 1."""

    def func(t):
        t = np.asarray(t, dtype=float)
        return np.maximum(np.exp(-2.0 * t), np.expm1(-t) ** 2)

    return LimitFunction(func, 1.0, label="mu", bound=1.0)


def beta(m: int) -> float:
    """m (1 - e^{-1/m})."""
    if int(m) != m or m < 1:
        raise DomainError("beta needs an integer m >= 1")
    return -m * math.expm1(-1.0 / m)


def eth(m: int) -> float:
    """(m/2) (1 - e^{-2/m})."""
    if int(m) != m or m < 1:
        raise DomainError("eth needs an integer m >= 1")
    return -0.5 * m * math.expm1(-2.0 / m)


@dataclass
class BoundReport:
    checked: int
    violations: list[tuple[str, int, float, float]]
    slack: float

    @property
    def passed(self) -> bool:
        return not self.violations


def holhos_bound_check(m_range: Sequence[int], grid: HalfLineGrid | None = None,
                       slack: float = 1e-12) -> BoundReport:
    """Evaluate both inequality chains at every (m, xi).

    Chain g:  e^{-xi b} - e^{-xi} <= ((1-b)/2)(xi e^{-xi b} + xi e^{-xi})
              <= (1-b^2)/(2 e b),  b = beta(m);
    chain k:  e^{-2 xi d} - e^{-2 xi} <= ((2-d)/2)(xi e^{-xi d} + xi e^{-2 xi})
              <= (4-d^2)/(4 e d),  d = eth(m).
    Each link is checked separately; a violation is (link, m, xi, excess).
    The point at infinity is skipped, where every term vanishes.
    """
    grid = default_grid() if grid is None else grid
    ms = np.asarray(list(m_range), dtype=np.int64)
    if ms.size == 0 or ms.min() < 1:
        raise DomainError("m must be >= 1")
    x = grid.nodes[None, :]
    mf = ms.astype(float)[:, None]
    b = -mf * np.expm1(-1.0 / mf)
    d = -0.5 * mf * np.expm1(-2.0 / mf)
    e = math.e
    links = {}
    left = np.exp(-x * b) - np.exp(-x)
    mid = 0.5 * (1 - b) * (x * np.exp(-x * b) + x * np.exp(-x))
    right = (1 - b * b) / (2 * e * b)
    links["g:left<=mid"] = left - mid
    links["g:mid<=right"] = mid - right
    left = np.exp(-2 * x * d) - np.exp(-2 * x)
    mid = 0.5 * (2 - d) * (x * np.exp(-x * d) + x * np.exp(-2 * x))
    right = (4 - d * d) / (4 * e * d)
    links["k:left<=mid"] = left - mid
    links["k:mid<=right"] = mid - right
    violations = []
    for name, excess in links.items():
        bad = np.argwhere(excess > slack)
        for i, j in bad:
            violations.append((name, int(ms[i]), float(grid.nodes[j]), float(excess[i, j])))
    return BoundReport(int(ms.size * grid.nodes.size * len(links)), violations, slack)


# rate reports

def candidate(spec: str) -> tuple[str, Callable[[float], float]]:
    """Parse ``power(a)`` -> (1+p)^{-a} or ``exp(a)`` -> e^{-a p}."""
    s = spec.strip().replace(" ", "")
    for name in ("power", "exp"):
        if s.startswith(name + "(") and s.endswith(")"):
            try:
                a = float(s[len(name) + 1:-1])
            except ValueError:
                break
            if not math.isfinite(a):
                break
            if name == "power":
                return s, lambda p, a=a: (1.0 + p) ** (-a)
            return s, lambda p, a=a: math.exp(-a * p)
    raise DomainError(f"cannot parse candidate rate {spec!r}; use power(a) or exp(a)")


@dataclass
class RateReport:
    """Per-parameter delta, modulus, composite bound and measured error.

    ``ratios[label]`` is error / candidate(parameter); ``verdicts[label]`` is
    pass or fail.
    """

    parameters: list[float]
    delta: np.ndarray
    modulus: np.ndarray
    bound: np.ndarray
    error: np.ndarray
    error0: np.ndarray
    ratios: dict[str, np.ndarray]
    verdicts: dict[str, str]
    parameter_name: str = "p"

    @property
    def sound(self) -> bool:
        return bool(np.all(self.error <= self.bound + 1e-6))

    @property
    def passed(self) -> bool:
        return all(v == "pass" for v in self.verdicts.values())


def _candidate_verdict(errors: np.ndarray, ratios: np.ndarray, floor: float) -> str:
    if np.all(errors <= floor):
        return "pass"
    tail = ratios[-3:]
    if len(tail) >= 2 and all(b < a for a, b in zip(tail, tail[1:])):
        return "pass"
    return "fail"


def _mu_norms(fam: OperatorFamily, ms: np.ndarray, grid: HalfLineGrid,
              ctl: SummationControl) -> np.ndarray:
    """||R_m mu|| on the grid.

    When the grid holds the point at infinity and a_m >= 0 this is a_m
    exactly: 0 <= mu <= 1 gives S_n mu <= S_n 1 = 1, and S_n mu -> 1 there.
    """
    a = fam.scalars(ms)
    if grid.include_infinity and np.all(a >= 0):
        return a
    mu = mu_function()
    best = np.zeros(ms.size)
    for xi in grid.points:
        best = np.maximum(best, np.abs(family_values(fam, ms, mu, xi, ctl)))
    return best


def _rate_rows(params, T_grid, delta_of, fam, f, grid, candidates, floor, name):
    phi0 = phi(0)
    targets0 = _grid_targets(phi0, grid)
    targets = _grid_targets(f, grid)
    H = sup_norm(f, grid)
    n = len(params)
    delta = np.empty(n)
    modulus = np.empty(n)
    err0 = np.empty(n)
    err = np.empty(n)
    for i, p in enumerate(params):
        err0[i] = float(np.max(np.abs(T_grid(p, phi0) - targets0)))
        err[i] = float(np.max(np.abs(T_grid(p, f) - targets)))
        delta[i] = delta_of(p)
        # |e^{-t} - e^{-x}| <= 1, so larger deltas add nothing
        modulus[i] = modulus_hat(f, min(delta[i], 1.0))
    bound = modulus * err0 + 2.0 * modulus + H * err0
    ratios, verdicts = {}, {}
    for label, c in candidates.items():
        cv = np.array([c(p) for p in params], dtype=float)
        if np.any(cv <= 0):
            raise DomainError(f"candidate {label} must be positive on the schedule")
        ratios[label] = err / cv
        verdicts[label] = _candidate_verdict(err, ratios[label], floor)
    return RateReport(list(params), delta, modulus, bound, err, err0, ratios, verdicts, name)


def _as_candidates(candidates) -> dict[str, Callable[[float], float]]:
    if isinstance(candidates, Mapping):
        return dict(candidates)
    out = {}
    for c in candidates:
        label, fn = candidate(c) if isinstance(c, str) else c
        out[label] = fn
    return out


def rate_report_power_series(method: PowerSeriesMethod, fam: OperatorFamily, f: LimitFunction,
                             candidates, schedule: Sequence[float],
                             grid: HalfLineGrid | None = None,
                             ctl: SummationControl = DEFAULT_CONTROL,
                             floor: float = ERROR_FLOOR) -> RateReport:
    """Rate report along a power-series schedule.

    delta(y) = sqrt of the transform of m -> ||R_m mu||; the bound is
    w * e0 + 2 w + ||f|| e0 with w = modulus(f, delta) and e0 the phi_0 error.
    """
    grid = default_grid() if grid is None else grid
    cands = _as_candidates(candidates)
    pts = grid.points

    def T_grid(y, g):
        return ps_transform_operator_grid(method, fam, g, y, pts, ctl)

    def delta_of(y):
        env = fam.scalar_bound()
        r = ps_transform_result(method, lambda ms: _mu_norms(fam, np.asarray(ms), grid, ctl),
                                y, ctl, env)
        return math.sqrt(max(r.value, 0.0))

    return _rate_rows(list(schedule), T_grid, delta_of, fam, f, grid, cands, floor, "y")


def rate_report_integral(kernel: IntegralKernel, method: PowerSeriesMethod, fam: OperatorFamily,
                         f: LimitFunction, candidates, s_values: Sequence[float],
                         grid: HalfLineGrid | None = None,
                         ctl: SummationControl = DEFAULT_CONTROL,
                         quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
                         route: str = "closed", floor: float = ERROR_FLOOR) -> RateReport:
    """Rate report along an s-schedule with delta(s) = sqrt(||F^s mu||)."""
    grid = default_grid() if grid is None else grid
    cands = _as_candidates(candidates)
    pts = grid.points
    if route == "closed" and not closed_form_available(kernel, method):
        raise DomainError("the closed route needs the Abel kernel with the Borel method")

    def T_grid(s, g):
        if route == "closed":
            return f_operator_closed_many(fam, s, g, pts, ctl)
        return f_operator_quadrature_many(kernel, method, fam, s, g, pts, quadrature, ctl)

    def delta_of(s):
        # the shipped non-scaled families have a_m >= 0
        if grid.include_infinity and fam.kind != "scaled" and route == "closed":
            # F^s mu <= F^s 1 pointwise and equality holds at infinity
            y = s / (s + 1.0)
            if y == 0.0:
                return math.sqrt(abs(fam.scalar(0)))
            r = ps_transform_result(preset_abel(), lambda ms: np.abs(fam.scalars(ms)), y, ctl,
                                    fam.scalar_bound())
            return math.sqrt(max(r.value, 0.0))
        vals = T_grid(s, mu_function())
        return math.sqrt(float(np.max(np.abs(vals))))

    return _rate_rows(list(s_values), T_grid, delta_of, fam, f, grid, cands, floor, "s")
