"""Integral summability kernels and the composite operators V^y and F^s.

F^s(f; xi) = int_0^inf K(s, y) V^y(f; xi) dy, where V^y is the power-series
transform of m -> R_m(f; xi).  For the Abel kernel K(s, y) = e^{-y/s}/s and
the Borel method the y-integral can be done term by term, which leaves the
Abel transform at y = s/(s+1).  Both routes are implemented so that they can
be compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .exceptions import DomainError, QuadratureError
from .functions import HalfLineGrid, LimitFunction
from .operators import DEFAULT_CONTROL, OperatorFamily, SummationControl
from .summability import (
    ApproachSchedule,
    PowerSeriesMethod,
    default_schedule,
    preset_abel,
    ps_transform_operator,
    ps_transform_operator_grid,
    ps_transform_result,
)

__all__ = [
    "IntegralKernel",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "DEFAULT_S_SCHEDULE",
    "preset_abel_kernel",
    "kernel_mass",
    "v_operator",
    "f_operator_quadrature",
    "f_operator_quadrature_many",
    "f_operator_closed",
    "f_operator_closed_many",
    "m_bound_estimate",
    "closed_form_available",
    "s_schedule",
]

DEFAULT_S_SCHEDULE = (9.0, 99.0, 999.0, 9999.0)


@dataclass(frozen=True, eq=False)
class IntegralKernel:
    """Non-negative kernel K(s, y).

    ``tail_mass(s, Y)`` (optional) is the exact mass of K(s, .) beyond Y and
    ``cutoff(s, eps)`` a Y whose tail mass is below eps.  Kernels without
    them need an explicit ``QuadratureSpec.y_cutoff``.
    """

    eval: Callable[[float, float], float]
    label: str = "kernel"
    tail_mass: Callable[[float, float], float] | None = None
    cutoff: Callable[[float, float], float] | None = None
    name: str = "custom"

    def __call__(self, s: float, y):
        return self.eval(s, y)


def preset_abel_kernel() -> IntegralKernel:
    """K(s, y) = (1/s) e^{-y/s}; unit mass for every s > 0."""

    def ev(s, y):
        return np.exp(-np.asarray(y, dtype=float) / s) / s

    return IntegralKernel(
        eval=ev,
        label="abel-integral",
        tail_mass=lambda s, Y: math.exp(-Y / s),
        cutoff=lambda s, eps: s * max(math.log(1.0 / eps), 0.0),
        name="abel",
    )


@dataclass(frozen=True)
class QuadratureSpec:
    """Outer-integral settings; ``y_cutoff = None`` derives it from the kernel."""

    y_cutoff: float | None = None
    abs_tolerance: float = 1e-9
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise DomainError("abs_tolerance must be positive")
        if self.y_cutoff is not None and not self.y_cutoff > 0:
            raise DomainError("y_cutoff must be positive")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be at least 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def closed_form_available(kernel: IntegralKernel, method: PowerSeriesMethod) -> bool:
    return kernel.name == "abel" and method.kind == "borel"


def _cutoff(kernel: IntegralKernel, s: float, eps: float, q: QuadratureSpec) -> float:
    if q.y_cutoff is not None:
        return float(q.y_cutoff)
    if kernel.cutoff is None:
        raise DomainError(f"kernel {kernel.label!r} needs an explicit y_cutoff")
    return max(kernel.cutoff(s, eps), 1e-12)


def _check_s(s: float) -> float:
    s = float(s)
    if not math.isfinite(s) or s < 0:
        raise DomainError(f"s must be finite and >= 0, got {s}")
    return s


def kernel_mass(kernel: IntegralKernel, s: float, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """int_0^inf K(s, y) dy: quadrature on (0, Y] plus the analytic tail."""
    s = _check_s(s)
    if s == 0:
        if kernel.name == "abel":
            return 1.0
        raise DomainError("s = 0 is outside the kernel's domain")
    Y = _cutoff(kernel, s, q.abs_tolerance / 2, q)
    val, err = integrate.quad(lambda y: float(kernel.eval(s, y)), 0.0, Y,
                              epsabs=q.abs_tolerance / 4, epsrel=0.0,
                              limit=int(q.max_subdivisions))
    if not err <= q.abs_tolerance / 2:
        raise QuadratureError(f"kernel mass at s={s}: error estimate {err:.3g}")
    if kernel.tail_mass is not None:
        val += kernel.tail_mass(s, Y)
    return float(val)


def v_operator(method: PowerSeriesMethod, fam: OperatorFamily, y: float, f: LimitFunction,
               xi, ctl: SummationControl = DEFAULT_CONTROL) -> float:
    """V^y(f; xi); the same quantity as :func:`ps_transform_operator`."""
    return ps_transform_operator(method, fam, f, y, xi, ctl)


def _family_bound(fam: OperatorFamily) -> float:
    b = fam.scalar_bound()
    if b is None:
        raise DomainError(f"family {fam.label!r} has no declared bound on |a_m|")
    return b


def f_operator_quadrature_many(kernel: IntegralKernel, method: PowerSeriesMethod,
                               fam: OperatorFamily, s: float, f: LimitFunction, points,
                               q: QuadratureSpec = DEFAULT_QUADRATURE,
                               ctl: SummationControl = DEFAULT_CONTROL) -> np.ndarray:
    """F^s(f; xi) at each xi of ``points`` by vector adaptive quadrature over y.

    The y-range is cut where the kernel tail mass times M ||f|| falls below
    half the tolerance; quadrature gets the other half.
    """
    s = _check_s(s)
    if isinstance(points, HalfLineGrid):
        points = points.points
    points = list(points)
    if s == 0:
        if kernel.name != "abel":
            raise DomainError("s = 0 is outside the kernel's domain")
        # the Abel kernel concentrates at y = 0, where V^0 = R_0
        return ps_transform_operator_grid(method, fam, f, 0.0, points, ctl)
    scale = _family_bound(fam) * f.envelope()
    Y = _cutoff(kernel, s, q.abs_tolerance / (2 * max(scale, 1e-300)), q)
    if method.finite_radius and Y >= method.radius:
        raise DomainError("kernel cutoff exceeds the radius of the power-series method")

    def integrand(y):
        w = float(kernel.eval(s, y))
        if w == 0.0:
            return np.zeros(len(points))
        return w * ps_transform_operator_grid(method, fam, f, y, points, ctl)

    val, err = integrate.quad_vec(integrand, 0.0, Y, epsabs=q.abs_tolerance / 2, epsrel=0.0,
                                  norm="max", limit=int(q.max_subdivisions))
    if not err <= q.abs_tolerance / 2:
        raise QuadratureError(f"F^s quadrature at s={s}: error estimate {err:.3g}")
    return np.asarray(val, dtype=float)


def f_operator_quadrature(kernel: IntegralKernel, method: PowerSeriesMethod, fam: OperatorFamily,
                          s: float, f: LimitFunction, xi,
                          q: QuadratureSpec = DEFAULT_QUADRATURE,
                          ctl: SummationControl = DEFAULT_CONTROL) -> float:
    """F^s(f; xi) by adaptive quadrature of K(s, y) V^y(f; xi)."""
    return float(f_operator_quadrature_many(kernel, method, fam, s, f, [xi], q, ctl)[0])


def f_operator_closed_many(fam: OperatorFamily, s: float, f: LimitFunction, points,
                           ctl: SummationControl = DEFAULT_CONTROL) -> np.ndarray:
    """F^s(f; .) for the Abel kernel with the Borel method.

    Integrating e^{-y/s}/s against the Borel weights e^{-y} y^m/m! gives
    (1/(s+1)) (s/(s+1))^m, so F^s is the Abel transform at y = s/(s+1).
    """
    s = _check_s(s)
    return ps_transform_operator_grid(preset_abel(), fam, f, s / (s + 1.0), points, ctl)


def f_operator_closed(fam: OperatorFamily, s: float, f: LimitFunction, xi,
                      ctl: SummationControl = DEFAULT_CONTROL) -> float:
    return float(f_operator_closed_many(fam, s, f, [xi], ctl)[0])


def m_bound_estimate(method: PowerSeriesMethod, fam: OperatorFamily,
                     schedule: ApproachSchedule | None = None,
                     ctl: SummationControl = DEFAULT_CONTROL) -> float:
    """max over the schedule of the transform of m -> ||R_m phi_0|| = |a_m|."""
    schedule = default_schedule(method) if schedule is None else schedule
    env = fam.scalar_bound()
    best = 0.0
    for y in schedule:
        r = ps_transform_result(method, lambda ms: np.abs(fam.scalars(ms)), y, ctl, env)
        best = max(best, r.value)
    if not math.isfinite(best):
        raise DomainError("the family bound M is not finite on the schedule")
    return best


def s_schedule(points: Sequence[float] = DEFAULT_S_SCHEDULE) -> tuple[float, ...]:
    pts = tuple(float(p) for p in points)
    if not pts or any(p < 0 for p in pts) or any(b <= a for a, b in zip(pts, pts[1:])):
        raise DomainError("s-schedule must be non-negative and strictly increasing")
    return pts
