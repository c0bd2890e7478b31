"""Power series summability methods P_rho and their transforms.

A method is given by coefficients rho_m >= 0 (rho_0 > 0) with generating
function rho(y) of radius R.  The transform of a sequence x at 0 < y < R is

    (1 / rho(y)) * sum_m x_m rho_m y^m,

and its weights rho_m y^m / rho(y) are handled in log space.  Truncation is
certified from the mass of the discarded weights times an envelope
sup_m |x_m|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.special import gammaln

from .exceptions import DomainError, NumericalError, TruncationError
from .functions import INF, HalfLineGrid, LimitFunction
from .operators import (
    DEFAULT_CONTROL,
    OperatorFamily,
    SummationControl,
    family_values,
)

__all__ = [
    "PowerSeriesMethod",
    "ApproachSchedule",
    "TransformResult",
    "RegularityRow",
    "RegularityReport",
    "preset_abel",
    "preset_borel",
    "coefficient_method",
    "default_schedule",
    "truncated_weights",
    "ps_transform",
    "ps_transform_result",
    "ps_transform_operator",
    "ps_transform_operator_grid",
    "regularity_check",
    "limit_estimate",
    "accurate_sum",
]


def accurate_sum(values: np.ndarray, block: int = 4096) -> float:
    """Pairwise sums of fixed-size blocks, combined with math.fsum.

    The block layout depends only on the length, so results are reproducible.
    """
    values = np.asarray(values, dtype=float)
    if values.size <= block:
        return math.fsum(values.tolist())
    n_full = values.size // block
    parts = values[: n_full * block].reshape(n_full, block).sum(axis=1).tolist()
    parts.append(float(values[n_full * block:].sum()))
    return math.fsum(parts)


def _sequence_values(x: Callable, ms: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(x(ms), dtype=float)
        if vals.shape == ms.shape:
            return vals
        if vals.ndim == 0:
            return np.full(ms.shape, float(vals))
    except (TypeError, ValueError, IndexError):
        pass
    return np.array([float(x(int(m))) for m in ms], dtype=float)


@dataclass(frozen=True, eq=False)
class PowerSeriesMethod:
    """Coefficients rho_m, radius R and generating function rho(y).

    ``kind`` selects the tail certificate: ``abel`` and ``borel`` use exact
    or geometric tail formulas, ``polynomial`` has finitely many nonzero
    coefficients, ``general`` uses 1 - (sum of kept weights).
    """

    rho: Callable[[int], float]
    radius: float
    rho_sum: Callable[[float], float] | None = None
    label: str = "P"
    kind: str = "general"
    log_rho: Callable[[np.ndarray], np.ndarray] | None = None
    log_rho_sum: Callable[[float], float] | None = None
    coefficients: tuple[float, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("radius of convergence must be positive")
        if not float(self.rho(0)) > 0:
            raise DomainError("rho_0 must be positive")

    @property
    def finite_radius(self) -> bool:
        return math.isfinite(self.radius)

    def log_coefficients(self, ms: np.ndarray) -> np.ndarray:
        if self.log_rho is not None:
            return np.asarray(self.log_rho(ms), dtype=float)
        vals = _sequence_values(self.rho, ms)
        if np.any(vals < 0):
            raise DomainError(f"{self.label}: coefficients must be non-negative")
        with np.errstate(divide="ignore"):
            return np.log(vals)

    def log_normalizer(self, y: float) -> float:
        if self.log_rho_sum is not None:
            return float(self.log_rho_sum(y))
        if self.rho_sum is not None:
            return math.log(self.rho_sum(y))
        return math.log(self._partial_rho_sum(y))

    def generating(self, y: float) -> float:
        """rho(y): closed form when supplied, else adaptive partial summation."""
        if self.rho_sum is not None:
            return float(self.rho_sum(y))
        if self.log_rho_sum is not None:
            return math.exp(self.log_rho_sum(y))
        return self._partial_rho_sum(y)

    def _partial_rho_sum(self, y: float) -> float:
        key = ("rho_sum", y)
        if key in self._cache:
            return self._cache[key]
        if self.coefficients is not None:
            total = math.fsum(c * y ** m for m, c in enumerate(self.coefficients))
        else:
            terms, m, chunk = [], 0, 256
            logy = math.log(y) if y > 0 else -math.inf
            while True:
                ms = np.arange(m, m + chunk)
                lt = self.log_coefficients(ms) + ms * logy
                t = np.exp(lt)
                terms.extend(t.tolist())
                m += chunk
                # stop once the last chunk is negligible and shrinking
                if t[-1] <= 1e-18 * math.fsum(terms) and t[-1] <= t[0]:
                    break
                if m > 10_000_000:
                    raise TruncationError(f"{self.label}: rho({y}) did not converge")
            total = math.fsum(terms)
        self._cache[key] = total
        return total

    def weights(self, ms: np.ndarray, y: float) -> np.ndarray:
        """rho_m y^m / rho(y) for integer array ``ms``."""
        ms = np.asarray(ms, dtype=np.int64)
        if y == 0.0:
            return np.where(ms == 0, 1.0, 0.0)
        lw = self.log_coefficients(ms) + ms * math.log(y) - self.log_normalizer(y)
        return np.exp(lw)

    @property
    def certified_normalizer(self) -> bool:
        return self.kind in ("abel", "borel", "polynomial") or self.rho_sum is not None \
            or self.log_rho_sum is not None

    def tail_after(self, ms: np.ndarray, w: np.ndarray, y: float, partial: float) -> np.ndarray:
        """Upper bounds for the weight mass beyond each m in ``ms``.

        ``partial`` is the weight mass strictly before ``ms[0]``.
        """
        if y == 0.0:
            return np.zeros(ms.shape)
        if self.kind == "abel":
            return np.power(y, ms + 1.0)
        if self.kind == "borel":
            nxt = w * y / (ms + 1.0)
            out = np.full(ms.shape, np.inf)
            ok = ms + 2.0 > y
            out[ok] = nxt[ok] * (ms[ok] + 2.0) / (ms[ok] + 2.0 - y)
            return out
        if self.kind == "polynomial" and self.coefficients is not None:
            return np.where(ms >= len(self.coefficients) - 1, 0.0, np.inf)
        return np.maximum(1.0 - (partial + np.cumsum(w)), 0.0)

    # mpmath route
    def mp_coefficient(self, m: int):
        if self.kind == "abel":
            return mpmath.mpf(1)
        if self.kind == "borel":
            return 1 / mpmath.factorial(m)
        return mpmath.mpf(float(self.rho(m)))

    def mp_normalizer(self, y):
        if self.kind == "abel":
            return 1 / (1 - y)
        if self.kind == "borel":
            return mpmath.exp(y)
        if self.coefficients is not None:
            return mpmath.fsum(mpmath.mpf(c) * y ** m for m, c in enumerate(self.coefficients))
        return mpmath.mpf(self.generating(float(y)))


def preset_abel() -> PowerSeriesMethod:
    """rho_m = 1, R = 1, rho(y) = 1/(1-y)."""
    return PowerSeriesMethod(
        rho=lambda m: 1.0,
        radius=1.0,
        rho_sum=lambda y: 1.0 / (1.0 - y),
        label="abel",
        kind="abel",
        log_rho=lambda ms: np.zeros(np.shape(ms)),
        log_rho_sum=lambda y: -math.log1p(-y),
    )


def preset_borel() -> PowerSeriesMethod:
    """rho_m = 1/m!, R = inf, rho(y) = e^y."""
    return PowerSeriesMethod(
        rho=lambda m: 1.0 / math.factorial(m) if m < 171 else 0.0,
        radius=math.inf,
        rho_sum=math.exp,
        label="borel",
        kind="borel",
        log_rho=lambda ms: -gammaln(np.asarray(ms, dtype=float) + 1.0),
        log_rho_sum=lambda y: float(y),
    )


def coefficient_method(coefficients: Sequence[float], label: str | None = None) -> PowerSeriesMethod:
    """Method with finitely many coefficients (a polynomial, so R = inf)."""
    coeffs = tuple(float(c) for c in coefficients)
    if not coeffs or coeffs[0] <= 0 or any(c < 0 for c in coeffs):
        raise DomainError("coefficients need rho_0 > 0 and rho_m >= 0")

    def rho(m):
        return coeffs[m] if 0 <= m < len(coeffs) else 0.0

    def log_rho(ms):
        ms = np.asarray(ms, dtype=np.int64)
        arr = np.array(coeffs)
        vals = np.where(ms < len(coeffs), arr[np.minimum(ms, len(coeffs) - 1)], 0.0)
        with np.errstate(divide="ignore"):
            return np.log(vals)

    def rho_sum(y):
        return math.fsum(c * y ** m for m, c in enumerate(coeffs))

    return PowerSeriesMethod(
        rho=rho, radius=math.inf, rho_sum=rho_sum,
        label=label or "coeffs(" + ",".join(f"{c:g}" for c in coeffs) + ")",
        kind="polynomial", log_rho=log_rho, coefficients=coeffs,
    )


@dataclass(frozen=True)
class ApproachSchedule:
    """Strictly increasing y values approaching the radius from below."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts:
            raise DomainError("schedule must be non-empty")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise DomainError("schedule points must be strictly increasing")
        if pts[0] < 0:
            raise DomainError("schedule points must be non-negative")
        object.__setattr__(self, "points", pts)

    def check_within(self, radius: float):
        if not all(p < radius for p in self.points):
            raise DomainError(f"schedule points must be below the radius {radius}")

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def default_schedule(method: PowerSeriesMethod) -> ApproachSchedule:
    """R(1 - 2^-j), j = 1..12, for finite R; 2^j, j = 0..8, otherwise."""
    if method.finite_radius:
        return ApproachSchedule(tuple(method.radius * (1.0 - 2.0 ** -j) for j in range(1, 13)))
    return ApproachSchedule(tuple(2.0 ** j for j in range(0, 9)))


def _check_y(method: PowerSeriesMethod, y: float, allow_zero: bool = False) -> float:
    y = float(y)
    if not math.isfinite(y) or y < 0 or (y == 0 and not allow_zero) or y >= method.radius:
        raise DomainError(f"y must satisfy 0 < y < R = {method.radius}, got {y}")
    return y


def truncated_weights(method: PowerSeriesMethod, y: float, envelope: float = 1.0,
                      ctl: SummationControl = DEFAULT_CONTROL) -> tuple[np.ndarray, np.ndarray]:
    """Indices and weights whose discarded mass times ``envelope`` is below tolerance."""
    y = _check_y(method, y, allow_zero=True)
    if y == 0.0:
        return np.array([0], dtype=np.int64), np.array([1.0])
    thresh = ctl.tail_tolerance / max(envelope, 1e-300)
    ms_parts, w_parts = [], []
    start, size, partial = 0, 1024, 0.0
    while True:
        ms = np.arange(start, start + size, dtype=np.int64)
        w = method.weights(ms, y)
        tail = method.tail_after(ms, w, y, partial)
        hit = np.nonzero(tail < thresh)[0]
        if hit.size:
            cut = int(hit[0]) + 1
            ms_parts.append(ms[:cut])
            w_parts.append(w[:cut])
            break
        ms_parts.append(ms)
        w_parts.append(w)
        partial += math.fsum(w.tolist())
        start += size
        size = min(2 * size, 1 << 18)
        if start >= ctl.max_terms:
            raise TruncationError(
                f"{method.label} weights at y={y} need more than max_terms={ctl.max_terms}")
    return np.concatenate(ms_parts), np.concatenate(w_parts)


@dataclass(frozen=True)
class TransformResult:
    value: float
    terms: int
    certified: bool


def _mp_transform(method, x, y, ctl, envelope) -> TransformResult:
    with mpmath.workdps(int(ctl.dps)):
        ymp = mpmath.mpf(y)
        norm = method.mp_normalizer(ymp)
        tol = mpmath.mpf(ctl.tail_tolerance)
        env = mpmath.mpf(envelope if envelope is not None else 1.0)
        total = mpmath.mpf(0)
        wsum = mpmath.mpf(0)
        seen = mpmath.mpf(0)
        for m in range(int(ctl.max_terms)):
            w = method.mp_coefficient(m) * ymp ** m / norm
            xm = float(x(m))
            if not math.isfinite(xm):
                raise NumericalError(f"non-finite term x_{m}")
            seen = max(seen, abs(mpmath.mpf(xm)))
            total += xm * w
            wsum += w
            if method.kind == "abel":
                tail = ymp ** (m + 1)
            elif method.kind == "borel":
                nxt = w * ymp / (m + 1)
                tail = nxt * (m + 2) / (m + 2 - ymp) if m + 2 > ymp else mpmath.inf
            elif method.coefficients is not None:
                tail = 0 if m >= len(method.coefficients) - 1 else mpmath.inf
            else:
                tail = max(1 - wsum, 0)
            bound_env = env if envelope is not None else max(seen, env)
            if tail * bound_env < tol:
                return TransformResult(float(total), m + 1, envelope is not None)
    raise TruncationError(f"{method.label} transform at y={y} exceeded max_terms")


def ps_transform_result(method: PowerSeriesMethod, x: Callable, y: float,
                        ctl: SummationControl = DEFAULT_CONTROL,
                        envelope: float | None = None) -> TransformResult:
    """Truncated transform of the sequence ``x`` with certification status.

    With ``envelope`` (a bound on sup|x_m|) the truncation error is below
    ``ctl.tail_tolerance``.  Without one, the running maximum of |x_m| is
    used and the result is flagged uncertified.  ``ctl.dps`` selects mpmath
    arithmetic, for sequences whose transform cancels heavily.
    """
    y = _check_y(method, y)
    if ctl.dps is not None:
        return _mp_transform(method, x, y, ctl, envelope)
    guess = 1.0 if envelope is None else float(envelope)
    for _ in range(8):
        ms, w = truncated_weights(method, y, guess, ctl)
        xv = _sequence_values(x, ms)
        if not np.all(np.isfinite(xv)):
            raise NumericalError("non-finite term encountered in transform")
        seen = float(np.max(np.abs(xv))) if xv.size else 0.0
        if envelope is not None or seen <= guess:
            value = math.fsum((w * xv).tolist())
            return TransformResult(value, int(ms.size), envelope is not None and
                                   method.certified_normalizer)
        guess = 2.0 * seen
    raise NumericalError("sequence envelope kept growing; transform may diverge")


def ps_transform(method: PowerSeriesMethod, x: Callable, y: float,
                 ctl: SummationControl = DEFAULT_CONTROL,
                 envelope: float | None = None) -> float:
    """(1/rho(y)) sum_m x_m rho_m y^m; see :func:`ps_transform_result`."""
    return ps_transform_result(method, x, y, ctl, envelope).value


def _operator_envelope(fam: OperatorFamily, f: LimitFunction) -> float | None:
    b = fam.scalar_bound()
    return None if b is None else b * f.envelope()


def _operator_weights(method, fam, f, y, ctl):
    env = _operator_envelope(fam, f)
    if env is None:
        # bound the scale sequence on a generous prefix, then re-check
        ms, w = truncated_weights(method, y, f.envelope(), ctl)
        env = float(np.max(np.abs(fam.scalars(ms)))) * f.envelope()
    ms, w = truncated_weights(method, y, max(env, 1e-300), ctl)
    a = fam.scalars(ms)
    keep = a != 0.0
    return ms[keep], w[keep] * a[keep]


def ps_transform_operator(method: PowerSeriesMethod, fam: OperatorFamily, f: LimitFunction,
                          y: float, xi, ctl: SummationControl = DEFAULT_CONTROL) -> float:
    """(1/rho(y)) sum_m R_m(f; xi) rho_m y^m, the operator V^y applied to f at xi."""
    return float(ps_transform_operator_grid(method, fam, f, y, [xi], ctl)[0])


def ps_transform_operator_grid(method: PowerSeriesMethod, fam: OperatorFamily,
                               f: LimitFunction, y: float, points,
                               ctl: SummationControl = DEFAULT_CONTROL) -> np.ndarray:
    """V^y f at every point of ``points`` (a grid or a list that may hold INF)."""
    if isinstance(points, HalfLineGrid):
        points = points.points
    y = _check_y(method, y, allow_zero=True)
    ms, aw = _operator_weights(method, fam, f, y, ctl)
    out = np.empty(len(points))
    if f.exp_coeffs is not None:
        c0, c1, c2 = f.exp_coeffs
        n = (ms + 1).astype(float)
        g1 = n * np.expm1(-1.0 / n)
        g2 = n * np.expm1(-2.0 / n)
        base = accurate_sum(aw)
        for i, xi in enumerate(points):
            if xi is INF:
                out[i] = c0 * base
                continue
            x = float(xi)
            v = c0 * base
            if c1:
                v += c1 * accurate_sum(aw * np.exp(x * g1))
            if c2:
                v += c2 * accurate_sum(aw * np.exp(x * g2))
            out[i] = v
        return out
    for i, xi in enumerate(points):
        vals = family_values(_UNIT_FAMILY, ms, f, xi, ctl)
        out[i] = accurate_sum(aw * vals)
    return out


_UNIT_FAMILY = OperatorFamily("szasz_shifted")


@dataclass(frozen=True)
class RegularityRow:
    m: int
    ratios: tuple[float, ...]
    passed: bool


@dataclass(frozen=True)
class RegularityReport:
    method: str
    schedule: tuple[float, ...]
    rows: tuple[RegularityRow, ...]
    threshold: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def regularity_check(method: PowerSeriesMethod, m_max: int,
                     schedule: ApproachSchedule | None = None,
                     threshold: float = 1e-3) -> RegularityReport:
    """Ratios rho_m y^m / rho(y) along the schedule for m = 0..m_max.

    A row passes when its last ratio is below ``threshold`` and the ratios
    strictly decrease over the final three schedule points.
    """
    schedule = default_schedule(method) if schedule is None else schedule
    schedule.check_within(method.radius)
    ms = np.arange(int(m_max) + 1, dtype=np.int64)
    logc = method.log_coefficients(ms)
    table = np.empty((ms.size, len(schedule)))
    for j, y in enumerate(schedule):
        y = _check_y(method, y)
        table[:, j] = np.exp(logc + ms * math.log(y) - method.log_normalizer(y))
    rows = []
    for i, m in enumerate(ms):
        r = table[i]
        tail = r[-3:]
        decreasing = len(tail) >= 2 and all(b < a for a, b in zip(tail, tail[1:]))
        rows.append(RegularityRow(int(m), tuple(float(v) for v in r),
                                  bool(r[-1] < threshold and decreasing)))
    return RegularityReport(method.label, schedule.points, tuple(rows), threshold)


def limit_estimate(method: PowerSeriesMethod, x: Callable, schedule: ApproachSchedule,
                   ctl: SummationControl = DEFAULT_CONTROL,
                   envelope: float | None = None) -> tuple[float, str]:
    """Transform value at the last schedule point and the trend of the approach.

    The trend classifies successive differences |T(y_{i+1}) - T(y_i)|:
    ``decreasing`` (non-increasing, ties allowed), ``increasing``, or
    ``oscillating``.
    """
    schedule.check_within(method.radius)
    vals = [ps_transform(method, x, y, ctl, envelope) for y in schedule]
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    if all(b <= a for a, b in zip(diffs, diffs[1:])):
        trend = "decreasing"
    elif all(b >= a for a, b in zip(diffs, diffs[1:])):
        trend = "increasing"
    else:
        trend = "oscillating"
    return vals[-1], trend
