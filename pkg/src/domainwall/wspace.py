"""Discrete weighted Sobolev space: weight, mean split, norms and backgrounds.

The space is normed by ``||u'||^2_{L2(dx)} + ||u||^2_{L2(dmu)}`` with
``dmu = h0 dx`` and ``h0 = exp(-beta |x|)`` away from the origin.  All
integrals use trapezoid weights so that discrete identities (means,
constraint integrals) are exact sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Grid, quad_weights

# Interior shapes s(x) for h0 = exp(-beta s) on [-1, 1].  Both match |x| in
# value and slope at +-1; the quartic also matches the (zero) curvature.
BLENDS = {
    "quadratic": lambda x: 0.5 * (x**2 + 1),
    "quartic": lambda x: (3 + 6 * x**2 - x**4) / 8,
}


@dataclass(frozen=True)
class WeightedMeasure:
    grid: Grid
    beta: float
    blend: str
    h0: np.ndarray
    weights: np.ndarray  # trapezoid weights times h0
    mu_total: float

    def mean(self, u) -> float:
        return float(np.dot(self.weights, u) / self.mu_total)

    def l2_sq(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(np.dot(self.weights, u * u))


def build_measure(grid: Grid, beta: float, blend: str = "quadratic") -> WeightedMeasure:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if blend not in BLENDS:
        raise ValueError(f"unknown blend {blend!r}; choose from {sorted(BLENDS)}")
    x = grid.x
    ax = np.abs(x)
    s = np.where(ax >= 1, ax, BLENDS[blend](np.clip(x, -1, 1)))
    h0 = np.exp(-beta * s)
    w = quad_weights(grid) * h0
    return WeightedMeasure(grid, float(beta), blend, h0, w, float(w.sum()))


@dataclass(frozen=True)
class MeanSplit:
    mean: float
    dotted: np.ndarray


def split(u, measure: WeightedMeasure) -> MeanSplit:
    """``u = mean + dotted`` with ``dotted`` of zero ``dmu``-mean."""
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("cannot split a non-finite field")
    m = measure.mean(u)
    d = u - m
    # one correction sweep brings the residual mean to rounding level
    d -= measure.mean(d)
    return MeanSplit(m, d)


def project_mean_zero(v, measure: WeightedMeasure) -> np.ndarray:
    return split(v, measure).dotted


def dirichlet_sq(u, grid: Grid) -> float:
    """Forward-difference ``int (u')^2 dx`` summed over cells."""
    du = np.diff(np.asarray(u, dtype=float))
    return float(np.dot(du, du) / grid.h)


def h_norm_sq(u, measure: WeightedMeasure) -> float:
    return dirichlet_sq(u, measure.grid) + measure.l2_sq(u)


def poincare_ratio(v, measure: WeightedMeasure) -> float:
    """``||v||^2_{L2(dmu)} / ||v'||^2_{L2(dx)}`` for mean-zero ``v``."""
    v = np.asarray(v, dtype=float)
    if abs(measure.mean(v)) > 1e-8 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("poincare_ratio expects a mean-zero function")
    d = dirichlet_sq(v, measure.grid)
    if d == 0:
        raise ValueError("ratio undefined for a constant function")
    return measure.l2_sq(v) / d


@dataclass(frozen=True)
class TMCheck:
    lhs: float
    exp_factor: float

    @property
    def ratio(self) -> float:
        return self.lhs / self.exp_factor


def trudinger_moser_check(v, a: float, b: float, measure: WeightedMeasure) -> TMCheck:
    """Both sides of ``int e^{a|v|} dmu <= C(b) exp(a^2/(4b) int v'^2)``."""
    if not 0 < b < measure.beta:
        raise ValueError(f"need 0 < b < beta = {measure.beta}, got b={b}")
    v = np.asarray(v, dtype=float)
    lhs = float(np.dot(measure.weights, np.exp(a * np.abs(v))))
    return TMCheck(lhs, math.exp(a * a / (4 * b) * dirichlet_sq(v, measure.grid)))


@dataclass(frozen=True)
class BackgroundPair:
    """Backgrounds ``u01, u02`` (linear outside [-1,1]) and ``omega = lam x^2``.

    ``d2_*`` hold the exact second derivatives; ``src_*`` the three-point
    second differences actually used as source terms by the minimizers
    (zero at the end nodes).  ``sum(trapezoid weights * src_i)`` equals
    ``alpha_i + beta_i`` to rounding.
    """

    grid: Grid
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    lam: float
    u01: np.ndarray
    u02: np.ndarray
    du01: np.ndarray
    du02: np.ndarray
    d2_01: np.ndarray
    d2_02: np.ndarray
    src1: np.ndarray
    src2: np.ndarray
    omega: np.ndarray


def background(x, alpha: float, beta: float):
    """``(u0, u0', u0'')`` with ``u0 = alpha x`` (x >= 1), ``-beta x`` (x <= -1), C^2 quartic between."""
    x = np.asarray(x, dtype=float)
    a, d = 0.5 * (alpha + beta), 0.5 * (alpha - beta)
    inner = np.abs(x) < 1
    u = np.where(x >= 1, alpha * x, -beta * x)
    du = np.where(x >= 1, alpha, -beta) * np.ones_like(x)
    d2 = np.zeros_like(x)
    xi = x[inner]
    u[inner] = a * (3 / 8 + 0.75 * xi**2 - xi**4 / 8) + d * xi
    du[inner] = a * (1.5 * xi - 0.5 * xi**3) + d
    d2[inner] = 1.5 * a * (1 - xi**2)
    return u, du, d2


def discrete_source(u0, h: float) -> np.ndarray:
    s = np.zeros_like(u0)
    s[1:-1] = (u0[2:] - 2 * u0[1:-1] + u0[:-2]) / h**2
    return s


def build_backgrounds(grid: Grid, alpha1: float, alpha2: float, beta1: float,
                      beta2: float, lam: float) -> BackgroundPair:
    x = grid.x
    if grid.x_min > -1 - grid.h or grid.x_max < 1 + grid.h:
        raise ValueError("grid must extend at least one cell beyond [-1, 1]")
    if np.count_nonzero(np.abs(x) <= 1) < 20:
        raise ValueError("grid too coarse: fewer than 20 points in [-1, 1]")
    u1, du1, d21 = background(x, alpha1, beta1)
    u2, du2, d22 = background(x, alpha2, beta2)
    return BackgroundPair(grid, alpha1, alpha2, beta1, beta2, lam, u1, u2, du1, du2, d21, d22,
                          discrete_source(u1, grid.h), discrete_source(u2, grid.h), lam * x**2)
