"""Closed-form Chern–Simons walls and lumps, with their energies and charges.

Nonrelativistic (Jackiw–Pi) walls solve ``u'' = -(2/kappa) e^u``; the
relativistic self-dual model at ``lam = 4/kappa^2`` gives
``u'' = lam e^u (e^u - 1)``, whose solutions come as a topological wall
(Higgs phase to symmetric phase) or a lump vanishing at both ends.
All formulas are written in log-stable form so that arguments far in the
tails do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as spi

from .core import Grid, integrate

LN2 = math.log(2.0)


@dataclass(frozen=True)
class JackiwPiParams:
    kappa: float
    m: float = 1.0
    g_c: float | None = None  # defaults to the critical value 1/(m kappa)

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")
        if self.m <= 0:
            raise ValueError("mass must be positive")
        if self.g_c is None:
            object.__setattr__(self, "g_c", 1.0 / (self.m * self.kappa))

    @property
    def lam(self) -> float:
        """Coefficient in ``u'' = lam e^u``."""
        return -2.0 / self.kappa


@dataclass(frozen=True)
class RelCSParams:
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    @property
    def lam(self) -> float:
        return 4.0 / self.kappa**2


FAMILIES = ("jp_pos_kappa", "jp_neg_kappa", "rel_topological", "rel_lump")


@dataclass(frozen=True)
class SolutionFamily:
    """A member of one closed-form family.

    ``u0`` is the value at the center: the maximum for ``jp_pos_kappa`` and
    ``rel_lump``, the minimum for ``jp_neg_kappa``, and ``2 ln phi0`` for the
    topological wall.  ``phi0 = exp(u0/2)``.
    """

    kind: str
    x0: float = 0.0
    u0: float = 0.0

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ValueError(f"unknown family {self.kind!r}; choose from {FAMILIES}")
        if self.kind in ("rel_lump", "rel_topological") and not self.u0 < 0:
            raise ValueError(f"{self.kind} needs u0 < 0 (phi0 in (0,1))")

    @classmethod
    def from_phi0(cls, kind: str, phi0: float, x0: float = 0.0) -> "SolutionFamily":
        _check_phi0(phi0)
        return cls(kind, x0, 2.0 * math.log(phi0))

    @property
    def phi0(self) -> float:
        return math.exp(self.u0 / 2)

    def u(self, x, kappa: float):
        if self.kind == "jp_pos_kappa":
            return jp_exact(x, kappa, self.x0, self.u0)
        if self.kind == "jp_neg_kappa":
            return jp_exact_negk(x, kappa, self.x0, self.u0)
        lam = RelCSParams(kappa).lam
        if self.kind == "rel_topological":
            return rel_topwall_u(x, lam, self.x0, self.u0)
        return rel_lump_u(x, lam, self.x0, self.u0)


def _check_phi0(phi0: float) -> None:
    if not 0 < phi0 < 1:
        raise ValueError(f"phi0 must lie in (0, 1), got {phi0}")


def log_cosh(t):
    """``ln cosh t`` without overflow."""
    a = np.abs(np.asarray(t, dtype=float))
    return a + np.log1p(np.exp(-2 * a)) - LN2


def _out(val, x):
    return float(val) if np.ndim(x) == 0 else val


# ---------------------------------------------------------------- Jackiw–Pi

def jp_exact(x, kappa: float, x0: float = 0.0, u0: float = 0.0):
    """Even solution of ``u'' = -(2/kappa) e^u`` with maximum ``u0`` at ``x0`` (kappa > 0)."""
    if not kappa > 0:
        raise ValueError("jp_exact needs kappa > 0")
    t = math.exp(u0 / 2) * (np.asarray(x, dtype=float) - x0) / math.sqrt(kappa)
    return _out(u0 - 2 * log_cosh(t), x)


def jp_exact_du(x, kappa: float, x0: float = 0.0, u0: float = 0.0):
    """Analytic derivative of :func:`jp_exact`."""
    if not kappa > 0:
        raise ValueError("jp_exact needs kappa > 0")
    k = math.exp(u0 / 2) / math.sqrt(kappa)
    return _out(-2 * k * np.tanh(k * (np.asarray(x, dtype=float) - x0)), x)


def jp_exact_negk(x, kappa: float, x0: float = 0.0, u0: float = 0.0):
    """The tanh-squared profile ``u0 + ln(1 + tanh^2 t)`` proposed for kappa < 0.

    Bounded and globally defined, with minimum ``u0`` at ``x0`` and limits
    ``u0 + ln 2``.  It does *not* satisfy ``u'' = -(2/kappa) e^u``; see
    :func:`jp_negk_local` for the actual solution through the same minimum.
    """
    if not kappa < 0:
        raise ValueError("jp_exact_negk needs kappa < 0")
    t = math.exp(u0 / 2) * (np.asarray(x, dtype=float) - x0) / math.sqrt(-kappa)
    return _out(u0 + np.log1p(np.tanh(t) ** 2), x)


def jp_negk_existence_halfwidth(kappa: float, u0: float = 0.0) -> float:
    """Half-width of the interval on which :func:`jp_negk_local` is finite."""
    if not kappa < 0:
        raise ValueError("needs kappa < 0")
    return 0.5 * math.pi * math.sqrt(-kappa) * math.exp(-u0 / 2)


def jp_negk_local(x, kappa: float, x0: float = 0.0, u0: float = 0.0):
    """Solution ``u0 - 2 ln cos t`` of ``u'' = -(2/kappa) e^u`` for kappa < 0.

    ``u`` has its minimum ``u0`` at ``x0`` and blows up at
    ``|x - x0| = jp_negk_existence_halfwidth(kappa, u0)``.
    """
    half = jp_negk_existence_halfwidth(kappa, u0)
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa - x0) >= half):
        raise ValueError(f"solution exists only for |x - x0| < {half:.12g}")
    t = math.exp(u0 / 2) * (xa - x0) / math.sqrt(-kappa)
    return _out(u0 - 2 * np.log(np.cos(t)), x)


# ------------------------------------------------------- relativistic walls

def _topwall_arg(x, lam: float, x0: float, u0: float):
    if not u0 < 0:
        raise ValueError("topological wall needs u0 < 0")
    s = math.sqrt(lam) * (np.asarray(x, dtype=float) - x0)
    return math.log(-math.expm1(u0)) + s - u0


def rel_topwall_u(x, lam: float, x0: float = 0.0, u0: float = -1.0):
    """Wall from the Higgs phase ``u = 0`` (left) to ``u = -inf`` (right), ``u(x0) = u0``."""
    return _out(-np.logaddexp(0.0, _topwall_arg(x, lam, x0, u0)), x)


def rel_topwall_du(x, lam: float, x0: float = 0.0, u0: float = -1.0):
    """Analytic ``u'`` of the topological wall, equal to ``-sqrt(lam)(1 - e^u)``."""
    a = _topwall_arg(x, lam, x0, u0)
    return _out(-math.sqrt(lam) / (1.0 + np.exp(-a)), x)


def rel_topwall_phi(x, lam: float, x0: float = 0.0, phi0: float = 0.5):
    _check_phi0(phi0)
    return _out(np.exp(0.5 * rel_topwall_u(x, lam, x0, 2 * math.log(phi0))), x)


def lump_rate(lam: float, u0: float) -> float:
    """Exponential decay rate ``sqrt(lam e^u0 (2 - e^u0))`` of a lump."""
    ea = math.exp(u0)
    return math.sqrt(lam * ea * (2 - ea))


def _log1p_c_cosh(c: float, z):
    # ln(1 + c cosh z) for c > 0
    return np.logaddexp(0.0, math.log(c) + log_cosh(z))


def rel_lump_u(x, lam: float, x0: float = 0.0, u0: float = -1.0):
    """Even lump with maximum ``u0 < 0`` at ``x0`` and ``u -> -inf`` at both ends."""
    if not u0 < 0:
        raise ValueError("lump needs u0 < 0")
    k = lump_rate(lam, u0)
    c = -math.expm1(u0)
    z = k * (np.asarray(x, dtype=float) - x0)
    return _out(u0 + math.log(2 - math.exp(u0)) - _log1p_c_cosh(c, z), x)


def rel_lump_du(x, lam: float, x0: float = 0.0, u0: float = -1.0):
    if not u0 < 0:
        raise ValueError("lump needs u0 < 0")
    k = lump_rate(lam, u0)
    c = -math.expm1(u0)
    z = k * (np.asarray(x, dtype=float) - x0)
    sech = np.exp(-log_cosh(z))
    return _out(-k * c * np.tanh(z) / (sech + c), x)


def rel_lump_phi(x, lam: float, x0: float = 0.0, phi0: float = 0.5, form: str = "exact"):
    """Scalar field of the lump with maximum ``phi0`` at ``x0``.

    ``form="exact"`` is ``exp(u/2)`` of :func:`rel_lump_u`.  ``form="printed"``
    is the variant in which ``phi0`` stands where ``phi0**2 = e^{u0}`` belongs;
    it shares the center value and the exponential tail shape but is not a
    solution.  It is kept because published lump energies were computed
    with it.
    """
    _check_phi0(phi0)
    if form == "exact":
        return _out(np.exp(0.5 * rel_lump_u(x, lam, x0, 2 * math.log(phi0))), x)
    if form == "printed":
        k = math.sqrt(lam * phi0 * (2 - phi0))
        z = k * (np.asarray(x, dtype=float) - x0)
        logden = _log1p_c_cosh(1 - phi0, z)
        return _out(phi0 * math.sqrt(2 - phi0) * np.exp(-0.5 * logden), x)
    raise ValueError(f"unknown lump form {form!r}")


def u0_from_epsilon(eps: float) -> float:
    """Lump maximum ``u0`` with ``e^u0 (2 - e^u0) = eps^2``, i.e. ``ln(1 - sqrt(1 - eps^2))``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    # 1 - sqrt(1 - e^2) rewritten to avoid cancellation as eps -> 0
    return math.log(eps * eps / (1 + math.sqrt((1 - eps) * (1 + eps))))


# ----------------------------------------------------------- energies

def energy_density(phi, dphi, kappa: float):
    """``2 phi'^2 + (2/kappa^2) phi^2 (1 - phi^2)^2``."""
    phi = np.asarray(phi, dtype=float)
    return 2 * np.asarray(dphi) ** 2 + (2 / kappa**2) * phi**2 * (1 - phi**2) ** 2


def magnetic_density(phi, kappa: float):
    """``(2/kappa^2) phi^2 (1 - phi^2)``, whose integral is the magnetic charge."""
    phi = np.asarray(phi, dtype=float)
    return (2 / kappa**2) * phi**2 * (1 - phi**2)


def _topwall_fields(x, kappa: float, x0: float, phi0: float):
    lam = RelCSParams(kappa).lam
    u0 = 2 * math.log(phi0)
    u = rel_topwall_u(x, lam, x0, u0)
    phi = np.exp(0.5 * u)
    dphi = 0.5 * phi * rel_topwall_du(x, lam, x0, u0)
    return phi, dphi


def topwall_grid(kappa: float, x0: float = 0.0, n: int = 20001) -> Grid:
    """Grid around ``x0`` wide enough that the truncated wall energy is within 1e-12 of 1/kappa."""
    # the density decays like e^{-2 sqrt(lam)|x|} on the Higgs side, faster on the other
    L = 16.0 * kappa
    return Grid(x0 - L, x0 + L, n)


@dataclass(frozen=True)
class WallEnergy:
    quadrature: float
    analytic: float
    interval: tuple[float, float]


def wall_energy(kappa: float, phi0: float = 0.5, x0: float = 0.0,
                interval: tuple[float, float] | None = None, n: int = 20001) -> WallEnergy:
    """Energy of the topological wall by Simpson quadrature of the reduced density.

    Without ``interval`` the grid of :func:`topwall_grid` is used, which
    approximates the whole line.
    """
    RelCSParams(kappa)
    _check_phi0(phi0)
    if n % 2 == 0:
        n += 1
    grid = topwall_grid(kappa, x0, n) if interval is None else Grid(interval[0], interval[1], n)
    phi, dphi = _topwall_fields(grid.x, kappa, x0, phi0)
    e = integrate(energy_density(phi, dphi, kappa), grid, "simpson")
    return WallEnergy(e, 1.0 / kappa, (grid.x_min, grid.x_max))


def truncated_energy(kappa: float, a: float, b: float, phi0: float = 0.5, x0: float = 0.0,
                     n: int = 20001) -> float:
    return wall_energy(kappa, phi0, x0, (a, b), n).quadrature


def charges(kappa: float, phi0: float = 0.5, x0: float = 0.0, n: int = 20001) -> tuple[float, float]:
    """``(Q_m, Q_e)`` of the topological wall, with ``Q_e = kappa Q_m``."""
    RelCSParams(kappa)
    _check_phi0(phi0)
    grid = topwall_grid(kappa, x0, n | 1)
    phi, _ = _topwall_fields(grid.x, kappa, x0, phi0)
    qm = integrate(magnetic_density(phi, kappa), grid, "simpson")
    return qm, kappa * qm


@dataclass(frozen=True)
class LumpEnergy:
    """Split energy ``4 * integral_term + boundary_term`` of a lump.

    ``integral_term`` is the integral of ``(phi' + phi(1-phi^2)/kappa)^2``
    over ``(0, upper)``; ``upper = inf`` means the full half-line.
    ``direct`` is the integral of the density over ``(-upper, upper)``.
    """

    integral_term: float
    boundary_term: float
    total: float
    direct: float
    upper: float
    form: str


def _lump_phi_dphi(kappa: float, phi0: float, form: str):
    lam = RelCSParams(kappa).lam
    if form == "exact":
        u0 = 2 * math.log(phi0)

        def phi(x):
            return math.exp(0.5 * rel_lump_u(x, lam, 0.0, u0))

        def dphi(x):
            return 0.5 * phi(x) * rel_lump_du(x, lam, 0.0, u0)

        k = lump_rate(lam, u0)
    elif form == "printed":
        k = math.sqrt(lam * phi0 * (2 - phi0))
        c = 1 - phi0

        def phi(x):
            return rel_lump_phi(x, lam, 0.0, phi0, "printed")

        def dphi(x):
            # d/dx of A (1 + c cosh kx)^{-1/2}
            z = k * x
            sech = math.exp(-float(log_cosh(z)))
            return -0.5 * phi(x) * k * c * math.tanh(z) / (sech + c)
    else:
        raise ValueError(f"unknown lump form {form!r}")
    return phi, dphi, k


def lump_energy(kappa: float, phi0: float, form: str = "exact",
                upper: float = math.inf) -> LumpEnergy:
    """Energy of the relativistic lump of height ``phi0`` via the split form."""
    RelCSParams(kappa)
    _check_phi0(phi0)
    phi, dphi, k = _lump_phi_dphi(kappa, phi0, form)
    # integrands are below 1e-30 relative once k x > 40
    b = min(upper, 40.0 / k + 1.0)

    def split(x):
        p = phi(x)
        return (dphi(x) + p * (1 - p * p) / kappa) ** 2

    def dens(x):
        p = phi(x)
        return 2 * dphi(x) ** 2 + (2 / kappa**2) * p * p * (1 - p * p) ** 2

    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    it = spi.quad(split, 0.0, b, **opts)[0]
    direct = 2 * spi.quad(dens, 0.0, b, **opts)[0]
    bt = (2 / kappa) * (1 - (1 - phi0**2) ** 2)
    return LumpEnergy(it, bt, 4 * it + bt, direct, upper, form)


def energy_curve(kappa: float, phi0s=None, form: str = "exact") -> list[dict]:
    """Rows ``{phi0, integral_term, boundary_term, energy}`` over a lattice of heights."""
    if phi0s is None:
        phi0s = np.round(np.linspace(0.01, 0.99, 99), 12)
    rows = []
    for p in phi0s:
        le = lump_energy(kappa, float(p), form)
        rows.append({"phi0": float(p), "integral_term": le.integral_term,
                     "boundary_term": le.boundary_term, "energy": le.total})
    return rows
