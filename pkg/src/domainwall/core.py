"""Uniform grids, quadrature, finite differences and tail fits.

Everything downstream works on samples over a truncated real line, so this
module is intentionally small and dependency-light.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``x_i = x_min + i*h`` on ``[x_min, x_max]`` with ``n`` points."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"grid needs at least 3 points, got n={self.n}")
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")

    @classmethod
    def symmetric(cls, L: float, n: int) -> "Grid":
        return cls(-float(L), float(L), int(n))

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n)

    def index_of(self, x0: float, tol: float = 1e-9) -> int:
        """Index of the node at ``x0``; raises if ``x0`` is not a node."""
        i = int(round((x0 - self.x_min) / self.h))
        if i < 0 or i >= self.n or abs(self.x_min + i * self.h - x0) > tol * max(1.0, self.h):
            raise ValueError(f"x={x0} is not a grid node of {self}")
        return i

    def refined(self) -> "Grid":
        """Same interval with the spacing halved (existing nodes are kept)."""
        return Grid(self.x_min, self.x_max, 2 * self.n - 1)

    def sub(self, i_lo: int, i_hi: int) -> "Grid":
        """Grid over the inclusive node range ``[i_lo, i_hi]``."""
        x = self.x
        return Grid(float(x[i_lo]), float(x[i_hi]), i_hi - i_lo + 1)


@dataclass
class Profile:
    """Named sampled fields sharing one grid."""

    grid: Grid
    fields: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for name, vals in self.fields.items():
            self.fields[name] = self._checked(name, vals)

    def _checked(self, name, vals):
        vals = np.asarray(vals, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"field {name!r} has shape {vals.shape}, expected ({self.grid.n},)")
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise ValueError(f"field {name!r} is not finite at index {bad[0]}")
        return vals

    def __getitem__(self, name: str) -> np.ndarray:
        return self.fields[name]

    def __contains__(self, name: str) -> bool:
        return name in self.fields

    def add(self, name: str, vals) -> None:
        self.fields[name] = self._checked(name, vals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def names(self) -> list[str]:
        return list(self.fields)


@dataclass(frozen=True)
class TailFit:
    """Least-squares polynomial fit on a window.

    ``coefficients`` are in increasing powers of x: ``(c0, c1)`` for the
    linear model and ``(c0, c1, c2)`` for the linear-plus-quadratic one.
    """

    window: tuple[float, float]
    model: str
    coefficients: tuple[float, ...]
    residual_rms: float

    @property
    def constant(self) -> float:
        return self.coefficients[0]

    @property
    def linear(self) -> float:
        return self.coefficients[1]

    @property
    def quadratic(self) -> float:
        return self.coefficients[2] if len(self.coefficients) > 2 else 0.0


def _check_finite(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ValueError(f"non-finite sample at index {bad[0]}")
    return values


def quad_weights(grid: Grid, rule: str = "trapezoid") -> np.ndarray:
    """Composite quadrature weights on ``grid``."""
    h = grid.h
    if rule == "trapezoid":
        w = np.full(grid.n, h)
        w[0] = w[-1] = h / 2
        return w
    if rule == "simpson":
        if grid.n % 2 == 0:
            raise ValueError("simpson rule needs an odd number of points")
        w = np.full(grid.n, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return w * h / 3
    raise ValueError(f"unknown quadrature rule {rule!r}")


def integrate(values, grid: Grid, rule: str = "trapezoid") -> float:
    """Composite trapezoid or Simpson integral of sampled ``values``."""
    values = _check_finite(values)
    if values.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got {values.shape}")
    return float(np.dot(quad_weights(grid, rule), values))


def cumulative_integral(values, grid: Grid) -> np.ndarray:
    """Running trapezoid integral with value 0 at ``grid.x_min``."""
    values = _check_finite(values)
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * grid.h * (values[1:] + values[:-1]))
    return out


def deriv1(values, h: float, i: int | None = None):
    """Second-order first derivative; one-sided three-point stencils at the ends."""
    f = np.asarray(values, dtype=float)
    n = f.size
    if i is not None:
        if not -n <= i < n:
            raise IndexError(f"index {i} out of range for {n} samples")
        i %= n
        if i == 0:
            return (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        if i == n - 1:
            return (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
        return (f[i + 1] - f[i - 1]) / (2 * h)
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    d[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    d[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return d


def deriv2(values, h: float, i: int | None = None):
    """Second derivative: central three-point stencil, one-sided four-point at the ends."""
    f = np.asarray(values, dtype=float)
    n = f.size
    if n < 4:
        raise ValueError("deriv2 needs at least 4 samples")
    if i is not None:
        if not -n <= i < n:
            raise IndexError(f"index {i} out of range for {n} samples")
        i %= n
        if i == 0:
            return (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
        if i == n - 1:
            return (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
        return (f[i + 1] - 2 * f[i] + f[i - 1]) / h**2
    d = np.empty_like(f)
    d[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    d[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    d[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return d


_MODELS = {"linear": 1, "linear-plus-quadratic": 2}


def fit_tail(values, grid: Grid, window: Sequence[float], model: str = "linear") -> TailFit:
    """Fit ``values`` on ``window`` by a linear or quadratic polynomial in x."""
    if model not in _MODELS:
        raise ValueError(f"unknown tail model {model!r}; choose from {sorted(_MODELS)}")
    a, b = float(window[0]), float(window[1])
    x = grid.x
    tol = 1e-9 * max(1.0, grid.h)
    if not (a < b and a >= grid.x_min - tol and b <= grid.x_max + tol):
        raise ValueError(f"window {window} is degenerate or outside the grid")
    mask = (x >= a - tol) & (x <= b + tol)
    if mask.sum() < 10:
        raise ValueError(f"window {window} contains {mask.sum()} points; need at least 10")
    xs = x[mask]
    ys = _check_finite(np.asarray(values, dtype=float)[mask])
    deg = _MODELS[model]
    poly = Polynomial.fit(xs, ys, deg)
    resid = ys - poly(xs)
    coef = poly.convert().coef
    coef = np.pad(coef, (0, deg + 1 - coef.size))
    return TailFit((a, b), model, tuple(float(c) for c in coef),
                   float(np.sqrt(np.mean(resid**2))))


def rk4_path(rhs: Callable[[np.ndarray], np.ndarray], y0, xs: np.ndarray,
             stop: Callable[[np.ndarray], bool] | None = None) -> tuple[np.ndarray, int]:
    """Classical RK4 for an autonomous system along the nodes ``xs``.

    The step between consecutive nodes may be negative or uneven. Integration
    halts before the first state for which ``stop`` is true; the second return
    value is the number of states stored.
    """
    y = np.atleast_1d(np.asarray(y0, dtype=float))
    out = np.empty((len(xs), y.size))
    out[0] = y
    for k in range(1, len(xs)):
        dt = xs[k] - xs[k - 1]
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if stop is not None and stop(y):
            return out[:k], k
        out[k] = y
    return out, len(xs)

