"""Szász-Mirakjan operators and the derived positive linear families.

Two independent evaluation routes are provided for S_m(f; x):

* :func:`szasz_eval` sums the Poisson-weighted series from k = 0 upward and
  stops with a geometric tail certificate;
* :func:`szasz_many` evaluates many indices at once, summing only a window
  around the Poisson mode whose two tails are bounded by Chernoff inequalities.

On the test exponentials both agree with the closed forms in
:func:`szasz_exp_closed`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .exceptions import DomainError, TruncationError
from .functions import INF, LimitFunction, check_point

__all__ = [
    "SummationControl",
    "DEFAULT_CONTROL",
    "OperatorFamily",
    "FAMILY_KINDS",
    "family",
    "szasz_eval",
    "szasz_many",
    "szasz_exp_closed",
    "family_eval",
    "family_values",
    "exp_closed_family",
    "is_perfect_square",
]


@dataclass(frozen=True)
class SummationControl:
    """Truncation settings for infinite series.

    ``dps`` switches scalar power-series transforms to mpmath arithmetic with
    that many decimal digits; it is ignored by operator evaluation.
    """

    tail_tolerance: float = 1e-12
    max_terms: int = 1_000_000
    dps: int | None = None

    def __post_init__(self):
        if not (0.0 < self.tail_tolerance < 1.0):
            raise DomainError("tail_tolerance must lie in (0, 1)")
        if int(self.max_terms) < 64:
            raise DomainError("max_terms must be at least 64")
        if self.dps is not None and int(self.dps) < 15:
            raise DomainError("dps must be at least 15")


DEFAULT_CONTROL = SummationControl()

# lgamma(k + 1) lookup, grown on demand
_LOG_FACT = np.zeros(1)
_LOG_FACT_CAP = 4_000_000


def _log_factorial(k: np.ndarray) -> np.ndarray:
    global _LOG_FACT
    kmax = int(k.max()) if k.size else 0
    if kmax >= _LOG_FACT_CAP:
        return gammaln(k + 1.0)
    if kmax >= _LOG_FACT.size:
        size = min(_LOG_FACT_CAP, max(2 * _LOG_FACT.size, kmax + 1, 4096))
        _LOG_FACT = gammaln(np.arange(size, dtype=float) + 1.0)
    return _LOG_FACT[k]


def szasz_exp_closed(m: int, nu: int, xi) -> float:
    """S_m(e^{-nu t}; xi) = exp(m xi (e^{-nu/m} - 1))."""
    if m < 1:
        raise DomainError("Szász index must be >= 1")
    if nu not in (0, 1, 2):
        raise DomainError("nu must be 0, 1 or 2")
    if nu == 0:
        return 1.0
    if xi is INF:
        return 0.0
    x = check_point(xi)
    return math.exp(m * x * math.expm1(-nu / m))


def _exp_closed_many(ns: np.ndarray, coeffs, x) -> np.ndarray:
    c0, c1, c2 = coeffs
    out = np.full(ns.shape, c0, dtype=float)
    if x is INF:
        return out
    n = ns.astype(float)
    if c1:
        out += c1 * np.exp(n * x * np.expm1(-1.0 / n))
    if c2:
        out += c2 * np.exp(n * x * np.expm1(-2.0 / n))
    return out


def szasz_eval(m: int, f: LimitFunction, xi, ctl: SummationControl = DEFAULT_CONTROL) -> float:
    """S_m(f; xi) by upward summation with a certified geometric tail.

    Terms are accumulated in log space.  Summation stops at the first
    k > m*xi where term_k * (k+1)/(k+1-m*xi), which dominates the remaining
    Poisson mass, drops below ``tail_tolerance / sup|f|``.
    """
    if int(m) != m or m < 1:
        raise DomainError(f"Szász index must be an integer >= 1, got {m!r}")
    m = int(m)
    if xi is INF:
        return float(f.limit)
    x = check_point(xi)
    if x == 0.0:
        return float(f(0.0))
    lam = m * x
    loglam = math.log(lam)
    L = math.log(2.0 / ctl.tail_tolerance) + 1.0
    K = int(lam + L / 3.0 + math.sqrt(L * L / 9.0 + 2.0 * L * lam)) + 2
    while True:
        if K + 1 > ctl.max_terms:
            raise TruncationError(
                f"S_{m}(f; {x}) needs more than max_terms={ctl.max_terms} terms")
        k = np.arange(K + 1)
        w = np.exp(k * loglam - lam - _log_factorial(k))
        fv = np.asarray(f(k / m), dtype=float)
        if not np.all(np.isfinite(fv)):
            raise DomainError(f"{f.label} is not finite on the Szász nodes")
        env = f.bound if f.bound is not None else max(float(np.max(np.abs(fv))), abs(f.limit))
        env = max(env, 1e-300)
        past = k > lam
        dom = np.full(k.shape, np.inf)
        dom[past] = w[past] * (k[past] + 1) / (k[past] + 1 - lam)
        hit = np.nonzero(dom < ctl.tail_tolerance / env)[0]
        if hit.size:
            stop = int(hit[0])
            return math.fsum((w[:stop + 1] * fv[:stop + 1]).tolist())
        K *= 2


def szasz_many(ns, f: LimitFunction, xi, ctl: SummationControl = DEFAULT_CONTROL,
               block: int = 1 << 20) -> np.ndarray:
    """S_n(f; xi) for every n in ``ns``.

    Test-exponential combinations use the closed forms.  Otherwise only
    k in [lambda - t_lo, lambda + t_hi] is summed, lambda = n*xi, with the
    cut points chosen from the Poisson tail bounds
    P(K <= lambda - t) <= exp(-t^2 / (2 lambda)) and
    P(K >= lambda + t) <= exp(-t^2 / (2 (lambda + t/3))),
    so each result is within ``tail_tolerance`` of the full series.
    """
    ns = np.atleast_1d(np.asarray(ns, dtype=np.int64))
    if ns.size and ns.min() < 1:
        raise DomainError("Szász indices must be >= 1")
    if xi is INF:
        return np.full(ns.shape, float(f.limit))
    x = check_point(xi)
    if f.exp_coeffs is not None:
        return _exp_closed_many(ns, f.exp_coeffs, x)
    if x == 0.0:
        return np.full(ns.shape, float(f(0.0)))

    env = max(f.envelope(), 1e-300)
    L = math.log(2.0 * env / ctl.tail_tolerance)
    lam = ns * x
    lo = np.maximum(0, np.floor(lam - np.sqrt(2.0 * L * lam))).astype(np.int64)
    hi = np.ceil(lam + L / 3.0 + np.sqrt(L * L / 9.0 + 2.0 * L * lam)).astype(np.int64)
    if f.support is not None:
        hi = np.minimum(hi, np.floor(ns * f.support).astype(np.int64))
    cnt = np.maximum(hi - lo + 1, 0)
    if cnt.size and cnt.max() > ctl.max_terms:
        raise TruncationError(f"Poisson window exceeds max_terms={ctl.max_terms}")

    out = np.zeros(ns.shape, dtype=float)
    live = np.nonzero(cnt > 0)[0]
    if live.size == 0:
        return out
    c_live = cnt[live]
    ends = np.cumsum(c_live)
    i0 = 0
    while i0 < live.size:
        base = ends[i0] - c_live[i0]
        i1 = max(int(np.searchsorted(ends, base + block, side="right")), i0 + 1)
        sel = live[i0:i1]
        c = cnt[sel]
        tot = int(c.sum())
        seg = np.repeat(np.arange(sel.size), c)
        first = np.cumsum(c) - c
        k = np.arange(tot, dtype=np.int64) + np.repeat(lo[sel] - first, c)
        lam_k = np.repeat(lam[sel], c)
        terms = k * np.log(lam_k) - lam_k - _log_factorial(k)
        np.exp(terms, out=terms)
        terms *= f(k / np.repeat(ns[sel], c).astype(float))
        out[sel] = np.bincount(seg, weights=terms, minlength=sel.size)
        i0 = i1
    return out


def is_perfect_square(m: int) -> bool:
    return m >= 0 and math.isqrt(m) ** 2 == m


FAMILY_KINDS = ("szasz_shifted", "alternating", "masked", "scaled")


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """m -> R_m = a_m S_{m+1}, m = 0, 1, ..., for a kind-specific scalar a_m.

    * ``szasz_shifted``: a_m = 1
    * ``alternating``: a_m = 1 + (-1)^m
    * ``masked``: a_m = 0 when m is 0 or a perfect square, else 1
    * ``scaled``: a_m = scale_sequence(m)
    """

    kind: str
    scale_sequence: Callable | None = None
    label: str | None = None
    scale_bound: float | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise DomainError(f"unknown family kind {self.kind!r}; expected one of {FAMILY_KINDS}")
        if self.label is None:
            object.__setattr__(self, "label", self.kind)

    def scalars(self, ms) -> np.ndarray:
        ms = np.atleast_1d(np.asarray(ms, dtype=np.int64))
        if ms.size and ms.min() < 0:
            raise DomainError("family index must be >= 0")
        if self.kind == "szasz_shifted":
            return np.ones(ms.shape)
        if self.kind == "alternating":
            return np.where(ms % 2 == 0, 2.0, 0.0)
        if self.kind == "masked":
            r = np.floor(np.sqrt(ms.astype(float))).astype(np.int64)
            # float sqrt may be off by one near large squares
            r = np.where((r + 1) * (r + 1) <= ms, r + 1, r)
            r = np.where(r * r > ms, r - 1, r)
            return np.where(r * r == ms, 0.0, 1.0)
        if self.scale_sequence is None:
            raise DomainError("the 'scaled' family needs a scale_sequence")
        try:
            vals = np.asarray(self.scale_sequence(ms), dtype=float)
            if vals.shape != ms.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([float(self.scale_sequence(int(m))) for m in ms])
        return vals

    def scalar(self, m: int) -> float:
        return float(self.scalars([m])[0])

    def scalar_bound(self) -> float | None:
        """sup_m |a_m| when known; equals sup_m ||R_m phi_0||."""
        if self.kind == "alternating":
            return 2.0
        if self.kind in ("szasz_shifted", "masked"):
            return 1.0
        return self.scale_bound


def family(kind: str, scale_sequence: Callable | None = None,
           scale_bound: float | None = None, label: str | None = None) -> OperatorFamily:
    """Build a family; ``scaled`` defaults to the constant sequence 1."""
    if kind == "scaled" and scale_sequence is None:
        scale_sequence = lambda m: np.ones(np.shape(m))  # noqa: E731
        scale_bound = 1.0
    return OperatorFamily(kind, scale_sequence, label, scale_bound)


def family_values(fam: OperatorFamily, ms, f: LimitFunction, xi,
                  ctl: SummationControl = DEFAULT_CONTROL) -> np.ndarray:
    """R_m(f; xi) for every m in ``ms``."""
    ms = np.atleast_1d(np.asarray(ms, dtype=np.int64))
    a = fam.scalars(ms)
    out = np.zeros(ms.shape, dtype=float)
    nz = a != 0.0
    if np.any(nz):
        out[nz] = a[nz] * szasz_many(ms[nz] + 1, f, xi, ctl)
    return out


def family_eval(fam: OperatorFamily, m: int, f: LimitFunction, xi,
                ctl: SummationControl = DEFAULT_CONTROL) -> float:
    """R_m(f; xi) through the upward-summation route."""
    if int(m) != m or m < 0:
        raise DomainError("family index must be an integer >= 0")
    a = fam.scalar(int(m))
    if a == 0.0:
        return 0.0
    return a * szasz_eval(int(m) + 1, f, xi, ctl)


def exp_closed_family(fam: OperatorFamily, m: int, nu: int, xi) -> float:
    """R_m(e^{-nu t}; xi) from the closed form."""
    if int(m) != m or m < 0:
        raise DomainError("family index must be an integer >= 0")
    a = fam.scalar(int(m))
    if a == 0.0:
        return 0.0
    return a * szasz_exp_closed(int(m) + 1, nu, xi)
