"""Functions on the half-line with a finite limit at infinity, and sup norms.

A :class:`LimitFunction` wraps a vectorised callable together with its
declared limit at infinity.  The point at infinity is addressed through the
:data:`INF` sentinel rather than ``math.inf`` so that evaluation stays total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import DomainError

__all__ = [
    "INF",
    "LimitFunction",
    "HalfLineGrid",
    "phi",
    "exp_combination",
    "rational",
    "constant",
    "evaluate",
    "sup_norm",
    "sup_over_grid",
    "refine_sup",
    "default_grid",
]


class _Infinity:
    """Singleton marking the point at infinity of the half-line."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_infinity(xi) -> bool:
    return xi is INF


def check_point(xi) -> float:
    """Validate a finite evaluation point and return it as float."""
    if xi is INF:
        raise DomainError("the infinity sentinel is not a finite point")
    x = float(xi)
    if not math.isfinite(x) or x < 0.0:
        raise DomainError(f"evaluation point must be finite and >= 0, got {xi!r}")
    return x


@dataclass(frozen=True, eq=False)
class LimitFunction:
    """A real function on [0, inf) with a declared finite limit at infinity.

    ``func`` must accept numpy arrays.  ``bound`` is an optional declared
    value of sup|f|, used to certify series truncation; when absent a grid
    estimate is used.  ``support`` marks a point beyond which f vanishes
    identically.  ``exp_coeffs = (c0, c1, c2)`` flags
    ``f = c0 + c1 e^{-x} + c2 e^{-2x}`` so operators can use closed forms.
    """

    func: Callable[[np.ndarray], np.ndarray]
    limit: float
    label: str = "f"
    bound: float | None = None
    support: float | None = None
    exp_coeffs: tuple[float, float, float] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        try:
            out = np.asarray(self.func(arr), dtype=float)
            if out.shape != arr.shape:
                out = np.broadcast_to(out, arr.shape).astype(float)
        except (TypeError, ValueError):
            out = np.array([float(self.func(float(v))) for v in arr.ravel()]).reshape(arr.shape)
        if out.ndim == 0:
            return float(out)
        return out

    def envelope(self) -> float:
        """sup|f|: the declared bound, or a cached default-grid estimate."""
        if self.bound is not None:
            return float(self.bound)
        if "envelope" not in self._cache:
            self._cache["envelope"] = max(sup_norm(self, default_grid()), 1e-300)
        return self._cache["envelope"]

    @property
    def order(self) -> int | None:
        """Order nu when this is the test exponential e^{-nu x}, else None."""
        if self.exp_coeffs is None:
            return None
        nz = [i for i, c in enumerate(self.exp_coeffs) if c != 0.0]
        if len(nz) == 1 and self.exp_coeffs[nz[0]] == 1.0:
            return nz[0]
        return None

    def __add__(self, other: "LimitFunction") -> "LimitFunction":
        coeffs = None
        if self.exp_coeffs is not None and other.exp_coeffs is not None:
            coeffs = tuple(a + b for a, b in zip(self.exp_coeffs, other.exp_coeffs))
        bound = None
        if self.bound is not None and other.bound is not None:
            bound = self.bound + other.bound
        f, g = self, other
        return LimitFunction(
            lambda x: f(x) + g(x),
            f.limit + g.limit,
            label=f"{f.label}+{g.label}",
            bound=bound,
            exp_coeffs=coeffs,
        )

    def scaled(self, alpha: float) -> "LimitFunction":
        f = self
        coeffs = None if f.exp_coeffs is None else tuple(alpha * c for c in f.exp_coeffs)
        return LimitFunction(
            lambda x: alpha * f(x),
            alpha * f.limit,
            label=f"{alpha:g}*{f.label}",
            bound=None if f.bound is None else abs(alpha) * f.bound,
            support=f.support,
            exp_coeffs=coeffs,
        )


def exp_combination(c0: float, c1: float, c2: float, label: str | None = None) -> LimitFunction:
    """The function c0 + c1 e^{-x} + c2 e^{-2x}."""
    c0, c1, c2 = float(c0), float(c1), float(c2)

    def func(x):
        u = np.exp(-x)
        return c0 + u * (c1 + c2 * u)

    if label is None:
        label = f"exp[{c0:g},{c1:g},{c2:g}]"
    return LimitFunction(func, c0, label=label, bound=abs(c0) + abs(c1) + abs(c2),
                         exp_coeffs=(c0, c1, c2))


def phi(nu: int) -> LimitFunction:
    """Test exponential e^{-nu x}, nu in {0, 1, 2}."""
    if nu not in (0, 1, 2):
        raise DomainError(f"test exponential order must be 0, 1 or 2, got {nu!r}")
    coeffs = [0.0, 0.0, 0.0]
    coeffs[nu] = 1.0
    return exp_combination(*coeffs, label=f"phi{nu}")


def rational(a: float = 1.0) -> LimitFunction:
    """1 / (1 + a x); limit 0 for a > 0."""
    if a < 0:
        raise DomainError("rational(a) needs a >= 0")
    label = "rational" if a == 1.0 else f"rational({a:g})"
    return LimitFunction(lambda x: 1.0 / (1.0 + a * x), 0.0 if a > 0 else 1.0,
                         label=label, bound=1.0)


def constant(c: float) -> LimitFunction:
    c = float(c)
    return exp_combination(c, 0.0, 0.0, label=f"const({c:g})")


def evaluate(f: LimitFunction, xi) -> float:
    """f(xi), with the declared limit returned for the :data:`INF` sentinel."""
    if xi is INF:
        return float(f.limit)
    return float(f(check_point(xi)))


@dataclass(frozen=True, eq=False)
class HalfLineGrid:
    """Finite probe set standing in for [0, inf) in sup computations."""

    cutoff: float
    nodes: np.ndarray
    include_infinity: bool = True

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise DomainError("grid needs at least one node")
        if nodes[0] != 0.0:
            raise DomainError("first grid node must be 0")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("grid nodes must be strictly increasing")
        if nodes[-1] > self.cutoff or self.cutoff <= 0:
            raise DomainError("grid nodes must lie in [0, cutoff] with cutoff > 0")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, cutoff: float = 40.0, count: int = 2001,
                include_infinity: bool = True) -> "HalfLineGrid":
        return cls(cutoff, np.linspace(0.0, cutoff, count), include_infinity)

    @property
    def points(self) -> list:
        """Nodes as floats followed by :data:`INF` when included."""
        pts: list = [float(v) for v in self.nodes]
        if self.include_infinity:
            pts.append(INF)
        return pts

    def restricted(self, upper: float) -> "HalfLineGrid":
        keep = self.nodes[self.nodes <= upper]
        return HalfLineGrid(min(self.cutoff, upper), keep, False)

    def refined(self) -> "HalfLineGrid":
        """Insert the midpoint of every cell; existing nodes are kept."""
        mids = 0.5 * (self.nodes[1:] + self.nodes[:-1])
        nodes = np.empty(self.nodes.size + mids.size)
        nodes[0::2] = self.nodes
        nodes[1::2] = mids
        return HalfLineGrid(self.cutoff, nodes, self.include_infinity)

    def __len__(self):
        return self.nodes.size + int(self.include_infinity)


_DEFAULT_GRID = HalfLineGrid.uniform(40.0, 2001, True)


def default_grid() -> HalfLineGrid:
    """2001 uniform nodes on [0, 40] plus the point at infinity."""
    return _DEFAULT_GRID


def sup_over_grid(values: Callable[[object], float], grid: HalfLineGrid) -> float:
    """max |values(p)| over the grid points (including :data:`INF` if set)."""
    return max(abs(float(values(p))) for p in grid.points)


def sup_norm(f: LimitFunction, grid: HalfLineGrid | None = None) -> float:
    """Grid lower bound for ||f||_inf; exact in the refinement limit."""
    grid = default_grid() if grid is None else grid
    s = float(np.max(np.abs(f(grid.nodes))))
    if grid.include_infinity:
        s = max(s, abs(float(f.limit)))
    return s


def refine_sup(grid_sup: Callable[[HalfLineGrid], float], grid: HalfLineGrid,
               tol: float = 1e-8, max_doublings: int = 6) -> tuple[float, HalfLineGrid]:
    """Double the grid until the sup changes by less than ``tol`` twice running.

    ``grid_sup`` maps a grid to a sup value.  Returns the last value and the
    grid it was computed on.
    """
    prev = grid_sup(grid)
    quiet = 0
    for _ in range(max_doublings):
        grid = grid.refined()
        cur = grid_sup(grid)
        quiet = quiet + 1 if abs(cur - prev) < tol else 0
        prev = cur
        if quiet == 2:
            break
    return prev, grid


def grid_from_points(points: Sequence[float], include_infinity: bool = True) -> HalfLineGrid:
    pts = np.asarray(sorted(set(float(p) for p in points)), dtype=float)
    if pts.size == 0 or pts[0] != 0.0:
        pts = np.concatenate([[0.0], pts[pts > 0]])
    return HalfLineGrid(float(pts[-1]) if pts[-1] > 0 else 1.0, pts, include_infinity)
