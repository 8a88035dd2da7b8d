"""Abelian-Higgs domain walls: ``u'' = lam (e^u - 1)`` and ``u'' = lam (e^u - eps)``.

Higgs-to-magnetic walls are integrated from the first integral
``(u')^2 = 2 lam (e^u - u - 1)``; magnetic-to-magnetic lumps start at their
maximum where the first integral is degenerate, so those use the second-order
equation.  Both sweeps use RK4 with step equal to the grid spacing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import Grid, Profile, cumulative_integral, deriv1, rk4_path

# |u| beyond this ends a general sweep (e^u overflow protection)
BLOWUP_CAP = 100.0


@dataclass(frozen=True)
class AbelianHiggsParams:
    e: float = 1.0
    xi: float = 1.0

    def __post_init__(self):
        if self.e <= 0 or self.xi <= 0:
            raise ValueError("need e > 0 and xi > 0")

    @property
    def lam(self) -> float:
        return 2 * self.e**2 * self.xi

    @classmethod
    def from_lambda(cls, lam: float) -> "AbelianHiggsParams":
        return cls(e=1.0, xi=lam / 2.0)


@dataclass(frozen=True)
class GeneralLiouvilleParams:
    """Coefficients of ``u'' = lam (e^u - eps)``."""

    lam: float
    eps: float

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lam must be nonzero")

    @classmethod
    def w_condensate(cls, e: float = 1.0, m_w: float = 1.0) -> "GeneralLiouvilleParams":
        # u'' = -4 e^2 e^u - 2 m_W^2
        return cls(lam=-4 * e**2, eps=-m_w**2 / (2 * e**2))


@dataclass(frozen=True)
class WallBC:
    kind: str  # "higgs-to-magnetic" | "magnetic-to-magnetic"
    x0: float = 0.0
    u0: float = -1.0

    def __post_init__(self):
        if self.kind not in ("higgs-to-magnetic", "magnetic-to-magnetic"):
            raise ValueError(f"unknown wall kind {self.kind!r}")
        if self.kind == "magnetic-to-magnetic" and self.u0 > 0:
            raise ValueError("the maximum u0 of a magnetic-to-magnetic wall must be <= 0")
        if self.kind == "higgs-to-magnetic" and self.u0 >= 0:
            raise ValueError("normalization value must be negative")


@dataclass
class WallSolution:
    profile: Profile
    tails_resolved: bool = True
    blew_up: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def u(self) -> np.ndarray:
        return self.profile["u"]

    @property
    def du(self) -> np.ndarray:
        return self.profile["du"]


def _em1_over_sq(u):
    """(e^u - u - 1)/u^2, analytic through u = 0."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-3
    out = np.empty_like(u)
    us = u[small]
    out[small] = 0.5 + us * (1 / 6 + us * (1 / 24 + us * (1 / 120 + us / 720)))
    ub = u[~small]
    out[~small] = (np.expm1(ub) - ub) / ub**2
    return out


def first_integral_htm(u, lam: float):
    """``u'`` on the Higgs-to-magnetic branch: ``-sqrt(2 lam) sqrt(e^u - u - 1)``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr > 0):
        raise ValueError("Higgs-to-magnetic branch requires u <= 0")
    val = math.sqrt(2 * lam) * u_arr * np.sqrt(_em1_over_sq(u_arr))
    return float(val) if np.ndim(u) == 0 else val


def default_grid(lam: float, n: int = 8001) -> Grid:
    """Symmetric grid with ``-lam L^2/2 < -60`` and ``exp(-sqrt(lam) L) < 1e-12``."""
    L = max(math.sqrt(120.0 / lam), 12 * math.log(10) / math.sqrt(lam)) * 1.02
    return Grid.symmetric(L, n)


def solve_higgs_to_magnetic(params: AbelianHiggsParams | float, grid: Grid | None = None,
                            x_ref: float = 0.0, u_ref: float = -1.0) -> WallSolution:
    """Wall with ``u(-inf) = 0``, ``u(+inf) = -inf`` normalized by ``u(x_ref) = u_ref``."""
    lam = params.lam if isinstance(params, AbelianHiggsParams) else float(params)
    if u_ref >= 0:
        raise ValueError("u_ref must be negative")
    grid = grid or default_grid(lam)
    x = grid.x
    i0 = grid.index_of(x_ref)

    c = math.sqrt(2 * lam)

    def rhs(y):
        return c * y * np.sqrt(_em1_over_sq(y))

    right, _ = rk4_path(rhs, [u_ref], x[i0:])
    left, _ = rk4_path(rhs, [u_ref], x[i0::-1])
    u = np.concatenate([left[::-1, 0], right[1:, 0]])
    du = first_integral_htm(np.minimum(u, 0.0), lam)

    sol = WallSolution(Profile(grid, {"u": u, "du": du}))
    if u[0] < -1e-10:
        sol.tails_resolved = False
        sol.notes.append(f"left tail not in Higgs phase: u(x_min)={u[0]:.3e}")
    if u[-1] > -60:
        sol.tails_resolved = False
        sol.notes.append(f"right tail too shallow: u(x_max)={u[-1]:.3e}")
    if not sol.tails_resolved:
        warnings.warn("; ".join(sol.notes), RuntimeWarning, stacklevel=2)
    return sol


def _sweep_from(rhs, y0, x: np.ndarray, x0: float, cap: float | None):
    """Integrate from the point x0 (not necessarily a node) to both ends of x."""
    if not x[0] <= x0 <= x[-1]:
        raise ValueError(f"start point {x0} lies outside the grid")
    stop = (lambda y: not abs(y[0]) <= cap) if cap is not None else None  # NaN stops too
    j = int(np.searchsorted(x, x0))  # first node >= x0
    on_node = j < x.size and math.isclose(x[j], x0, rel_tol=0, abs_tol=1e-12)
    if on_node:
        xr = x[j:]
        xl = x[j::-1]
    else:
        xr = np.concatenate([[x0], x[j:]])
        xl = np.concatenate([[x0], x[j - 1::-1]])
    right, nr = rk4_path(rhs, y0, xr, stop)
    left, nl = rk4_path(rhs, y0, xl, stop)
    if not on_node:
        right, nr = right[1:nr], nr - 1
        left, nl = left[1:nl], nl - 1
        i_lo = j - nl
        vals = np.concatenate([left[:nl][::-1], right[:nr]])
    else:
        i_lo = j - (nl - 1)
        vals = np.concatenate([left[:nl][::-1], right[1:nr]])
    return vals, i_lo


def solve_magnetic_to_magnetic(params: AbelianHiggsParams | float, x0: float = 0.0,
                               u0: float = -1.0, grid: Grid | None = None) -> WallSolution:
    """Lump with ``u(+-inf) = -inf`` and global maximum ``u0 <= 0`` at ``x0``."""
    lam = params.lam if isinstance(params, AbelianHiggsParams) else float(params)
    if u0 > 0:
        raise ValueError("maximum u0 must be <= 0")
    grid = grid or default_grid(lam)

    def rhs(y):
        return np.array([y[1], lam * np.expm1(y[0])])

    vals, _ = _sweep_from(rhs, [u0, 0.0], grid.x, x0, None)
    return WallSolution(Profile(grid, {"u": vals[:, 0], "du": vals[:, 1]}))


def solve_general(gparams: GeneralLiouvilleParams, grid: Grid, x_ref: float = 0.0,
                  u_ref: float = 0.0, du_ref: float = 0.0,
                  cap: float = BLOWUP_CAP) -> WallSolution:
    """Integrate ``u'' = lam (e^u - eps)`` outward from ``(u_ref, du_ref)`` at ``x_ref``.

    If ``|u|`` exceeds ``cap`` the sweep stops there; the returned profile
    covers only the nodes that were reached and ``blew_up`` is set.
    """
    lam, eps = gparams.lam, gparams.eps

    def rhs(y):
        # clipped so an RK stage past the cap cannot overflow
        return np.array([y[1], lam * (math.exp(min(y[0], 700.0)) - eps)])

    vals, i_lo = _sweep_from(rhs, [u_ref, du_ref], grid.x, x_ref, cap)
    i_hi = i_lo + vals.shape[0] - 1
    if vals.shape[0] < 3:
        raise RuntimeError("solution leaves the cap within one step of the start")
    sub = grid if (i_lo == 0 and i_hi == grid.n - 1) else grid.sub(i_lo, i_hi)
    sol = WallSolution(Profile(sub, {"u": vals[:, 0], "du": vals[:, 1]}))
    if sub is not grid:
        sol.blew_up = True
        sol.tails_resolved = False
        sol.notes.append(f"|u| exceeded {cap} outside [{sub.x_min:.6g}, {sub.x_max:.6g}]")
    return sol


def first_integral_drift(sol: WallSolution | Profile, gparams: GeneralLiouvilleParams) -> float:
    """Spread of ``(u')^2/2 - lam (e^u - eps u)`` along a profile.

    Scaled by the largest term magnitude (at least 1), so profiles that run
    up to a blow-up cap report a meaningful figure.
    """
    prof = sol.profile if isinstance(sol, WallSolution) else sol
    u, du = prof["u"], prof["du"]
    kin = 0.5 * du**2
    pot = gparams.lam * (np.exp(u) - gparams.eps * u)
    energy = kin - pot
    scale = max(1.0, float(np.max(kin)), float(np.max(np.abs(pot))))
    return float(energy.max() - energy.min()) / scale


@dataclass(frozen=True)
class RiccatiCheck:
    deviation: float
    constant: float
    excluded: int


def riccati_first_integral_check(sol: WallSolution | Profile,
                                 gparams: GeneralLiouvilleParams) -> RiccatiCheck:
    """Constancy of ``f'/f + lam eps x - lam g`` with ``f = e^u`` and ``g = int f``.

    ``g`` is anchored at ``g(x_min) = 0``.  ``f'/f`` is taken as the
    derivative of ``log f = u``; interior points where ``f`` underflows are
    excluded and counted.
    """
    prof = sol.profile if isinstance(sol, WallSolution) else sol
    grid = prof.grid
    u = prof["u"]
    f = np.exp(u)
    g = cumulative_integral(f, grid)
    q = deriv1(u, grid.h) + gparams.lam * gparams.eps * grid.x - gparams.lam * g
    interior = np.zeros(grid.n, dtype=bool)
    interior[1:-1] = True
    ok = interior & (f > 0)
    excluded = int(interior.sum() - ok.sum())
    qs = q[ok]
    return RiccatiCheck(float(qs.max() - qs.min()), float(np.median(qs)), excluded)
