"""Residual oracles: first-order (BPS) solutions checked against second-order equations.

Each ``check_*`` function samples a solution on a grid, reconstructs the
gauge fields from the first-order relations and reports sup-norm residuals
of the remaining equations over interior nodes.  :func:`refine` repeats a
check on a grid with half the spacing and applies the ``C h^2`` policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import abelian_wall as aw
from . import ew_minimizer as ew
from . import liouville_cs as cs
from . import u2_minimizer as u2
from .core import Grid, deriv1, deriv2

EXCLUDE_BELOW = 1e-12
EPS = np.finfo(float).eps


@dataclass
class ResidualReport:
    label: str
    residual: float
    h: float
    excluded: int = 0
    # rounding level of the stencils involved; residuals below it carry no information
    floor: float = 0.0

    def to_dict(self) -> dict:
        return {"label": self.label, "residual": self.residual, "h": self.h,
                "excluded": self.excluded, "floor": self.floor}


def _report(label, r, h, mask=None, floor=0.0) -> ResidualReport:
    r = np.asarray(r, dtype=float)
    keep = np.zeros(r.size, dtype=bool)
    keep[1:-1] = True
    interior = int(keep.sum())
    if mask is not None:
        keep &= mask
    vals = np.abs(r[keep])
    return ResidualReport(label, float(vals.max()) if vals.size else 0.0, h,
                          interior - int(keep.sum()), floor)


def _d2_floor(f, h) -> float:
    return 16 * EPS * float(np.max(np.abs(f))) / h**2


def _d1_floor(f, h) -> float:
    return 8 * EPS * float(np.max(np.abs(f))) / h


@dataclass
class RefinementCheck:
    label: str
    coarse: ResidualReport
    fine: ResidualReport

    @property
    def C(self) -> float:
        return self.coarse.residual / self.coarse.h**2

    @property
    def C_fine(self) -> float:
        return self.fine.residual / self.fine.h**2

    @property
    def threshold(self) -> float:
        return max(4 * self.C * self.fine.h**2, 4 * self.fine.floor)

    @property
    def passed(self) -> bool:
        return self.fine.residual <= self.threshold

    def to_dict(self) -> dict:
        return {"label": self.label, "coarse": self.coarse.to_dict(), "fine": self.fine.to_dict(),
                "C": self.C, "C_fine": self.C_fine, "threshold": self.threshold, "passed": self.passed}


def refine(check: Callable[[Grid], list[ResidualReport]], grid: Grid) -> list[RefinementCheck]:
    """Run ``check`` on ``grid`` and on the grid with half the spacing."""
    coarse = check(grid)
    fine = check(grid.refined())
    return [RefinementCheck(c.label, c, f) for c, f in zip(coarse, fine)]


# --------------------------------------------------------------- Abelian

def check_ah_second_order(u, du, grid: Grid, params: aw.AbelianHiggsParams) -> list[ResidualReport]:
    """Second-order Ginzburg–Landau pair for ``phi = sqrt(xi) e^{u/2}``, ``A = -u'/(2e)``."""
    e, xi, h = params.e, params.xi, grid.h
    phi = math.sqrt(xi) * np.exp(0.5 * np.asarray(u))
    A = -np.asarray(du) / (2 * e)
    mask = phi > EXCLUDE_BELOW
    r1 = deriv2(phi, h) - e**2 * A**2 * phi - e**2 * (phi**2 - xi) * phi
    r2 = deriv2(A, h) - 2 * e**2 * phi**2 * A
    return [_report("abelian-higgs: phi''", r1, h, mask, _d2_floor(phi, h)),
            _report("abelian-higgs: A''", r2, h, mask, _d2_floor(A, h))]


def check_w_condensate(u, du, grid: Grid, e: float = 1.0, m_w: float = 1.0) -> list[ResidualReport]:
    """Second-order W/P pair for ``W = e^{u/2}``, ``P = -u'/(2e)``."""
    h = grid.h
    W = np.exp(0.5 * np.asarray(u))
    P = -np.asarray(du) / (2 * e)
    dP, dW = deriv1(P, h), deriv1(W, h)
    mask = W > EXCLUDE_BELOW
    r1 = deriv2(W, h) - e**2 * P**2 * W - (2 * m_w**2 * W - 3 * e * dP * W + 4 * e**2 * W**3)
    r2 = deriv2(P, h) - 2 * e**2 * W**2 * P - 6 * e * W * dW
    return [_report("w-condensate: W''", r1, h, mask, _d2_floor(W, h) + _d1_floor(P, h)),
            _report("w-condensate: P''", r2, h, mask, _d2_floor(P, h) + _d1_floor(W, h))]


def ah_wall_check(lam: float = 2.0) -> Callable[[Grid], list[ResidualReport]]:
    params = aw.AbelianHiggsParams.from_lambda(lam)

    def run(grid):
        sol = aw.solve_higgs_to_magnetic(params, grid)
        return check_ah_second_order(sol.u, sol.du, grid, params)
    return run


def w_condensate_check(e: float = 1.0, m_w: float = 1.0) -> Callable[[Grid], list[ResidualReport]]:
    gp = aw.GeneralLiouvilleParams.w_condensate(e, m_w)

    def run(grid):
        sol = aw.solve_general(gp, grid)
        return check_w_condensate(sol.u, sol.du, sol.profile.grid, e, m_w)
    return run


# ---------------------------------------------------------- Chern–Simons

def _rel_cs_reports(tag, phi, A, kappa, h):
    A0 = (1 - phi**2) / kappa
    mask = phi > EXCLUDE_BELOW
    r1 = deriv2(phi, h) - A**2 * phi + A0**2 * phi - (phi**2 - 1) * (3 * phi**2 - 1) * phi / kappa**2
    r2 = kappa * deriv1(A0, h) - 2 * A * phi**2
    r3 = kappa * deriv1(A, h) - 2 * A0 * phi**2
    return [_report(f"{tag}: phi''", r1, h, mask, _d2_floor(phi, h)),
            _report(f"{tag}: kappa A0'", r2, h, mask, _d1_floor(A0, h) * kappa),
            _report(f"{tag}: kappa A'", r3, h, mask, _d1_floor(A, h) * kappa)]


def check_cs_second_order(kind: str, grid: Grid, kappa: float, x0: float = 0.0,
                          phi0: float = 0.5, m: float = 1.0) -> list[ResidualReport]:
    """Second-order Chern–Simons systems for the closed-form families.

    ``kind`` is ``rel_topological``, ``rel_lump`` or ``jp_pos_kappa``; the
    gauge fields come from the first-order relations (``A = -u'/2``) and the
    constraints defining ``A0``.
    """
    x, h = grid.x, grid.h
    if kind in ("rel_topological", "rel_lump"):
        lam = cs.RelCSParams(kappa).lam
        u0 = 2 * math.log(phi0)
        if kind == "rel_topological":
            u, du = cs.rel_topwall_u(x, lam, x0, u0), cs.rel_topwall_du(x, lam, x0, u0)
        else:
            u, du = cs.rel_lump_u(x, lam, x0, u0), cs.rel_lump_du(x, lam, x0, u0)
        return _rel_cs_reports(kind, np.exp(0.5 * u), -0.5 * du, kappa, h)
    if kind == "jp_pos_kappa":
        p = cs.JackiwPiParams(kappa, m)
        u0 = 2 * math.log(phi0)
        psi = np.exp(0.5 * cs.jp_exact(x, kappa, x0, u0))
        A = -0.5 * cs.jp_exact_du(x, kappa, x0, u0)
        A0 = -psi**2 / (2 * m * kappa)
        mask = psi > EXCLUDE_BELOW
        r1 = A0 * psi + deriv2(psi, h) / (2 * m) - A**2 * psi / (2 * m) + p.g_c * psi**3
        r2 = deriv1(A, h) - psi**2 / kappa
        r3 = deriv1(A0, h) - psi**2 * A / (m * kappa)
        return [_report("jackiw-pi: psi''", r1, h, mask, _d2_floor(psi, h) / (2 * m)),
                _report("jackiw-pi: A'", r2, h, mask, _d1_floor(A, h)),
                _report("jackiw-pi: A0'", r3, h, mask, _d1_floor(A0, h))]
    raise ValueError(f"unsupported family {kind!r}")


def closed_form_ode_residuals(h: float = 1e-3, L: float = 8.0) -> dict[str, float]:
    """Sup-norm finite-difference residuals of every closed form on ``[-L, L]`` with spacing ``h``."""
    n = int(round(2 * L / h)) + 1
    grid = Grid.symmetric(L, n)
    x = grid.x
    out = {}
    for kappa in (0.5, 1.0, 2.0):
        u = cs.jp_exact(x, kappa, 0.0, 0.0)
        out[f"jp_exact kappa={kappa}"] = _interior_sup(deriv2(u, h) + (2 / kappa) * np.exp(u))
    for kappa in (-0.5, -1.0, -2.0):
        u = cs.jp_exact_negk(x, kappa, 0.0, 0.0)
        out[f"jp_exact_negk kappa={kappa}"] = _interior_sup(deriv2(u, h) + (2 / kappa) * np.exp(u))
    for kappa in (0.5, 1.0, 2.0):
        lam = 4 / kappa**2
        for phi0 in (0.1, 0.5, 0.9):
            u0 = 2 * math.log(phi0)
            u = cs.rel_topwall_u(x, lam, 0.0, u0)
            ode = deriv2(u, h) - lam * np.exp(u) * np.expm1(u)
            bps = deriv1(u, h) + math.sqrt(lam) * (-np.expm1(u))
            out[f"rel_topwall kappa={kappa} phi0={phi0}"] = max(_interior_sup(ode), _interior_sup(bps))
            u = cs.rel_lump_u(x, lam, 0.0, u0)
            out[f"rel_lump kappa={kappa} phi0={phi0}"] = _interior_sup(deriv2(u, h) - lam * np.exp(u) * np.expm1(u))
    return out


def _interior_sup(r) -> float:
    return float(np.max(np.abs(np.asarray(r)[1:-1])))


def cs_check(kind: str, kappa: float = 1.0, phi0: float = 0.5) -> Callable[[Grid], list[ResidualReport]]:
    return lambda grid: check_cs_second_order(kind, grid, kappa, 0.0, phi0)


# ------------------------------------------------------------------ U(2)

def check_u2(res: u2.U2Result) -> list[ResidualReport]:
    """Second-order system for ``u_i`` and the first-order gauge equations."""
    prob = res.problem
    p, grid = prob.params, prob.grid
    h, lam, gm = grid.h, p.lam, p.gamma
    u1, u2_ = res.u()
    e1, e2 = np.exp(u1), np.exp(u2_)
    r1 = deriv2(u1, h) - lam * ((1 + gm) * e1 + (1 - gm) * e2 - 2)
    r2 = deriv2(u2_, h) - lam * ((1 - gm) * e1 + (1 + gm) * e2 - 2)
    l1, l2 = 0.5 * deriv1(u1, h), 0.5 * deriv1(u2_, h)  # (ln q_i)'
    e, g, xi = p.e, p.g, p.xi
    a = -(l1 + l2) / e
    A = -(l1 - l2) / g
    q1s, q2s = xi * e1, xi * e2
    r3 = deriv1(a, h) + 0.5 * e * (q1s + q2s - 2 * xi)
    r4 = deriv1(A, h) + 0.5 * g * (q1s - q2s)
    mask = (q1s > EXCLUDE_BELOW) & (q2s > EXCLUDE_BELOW)
    f1 = _d2_floor(u1, h) + 10 * lam * res.optim.grad_norm
    f2 = _d2_floor(u2_, h) + 10 * lam * res.optim.grad_norm
    return [_report("u2: u1''", r1, h, None, f1), _report("u2: u2''", r2, h, None, f2),
            _report("u2: a'", r3, h, mask, _d1_floor(a, h)),
            _report("u2: A'", r4, h, mask, _d1_floor(A, h))]


def u2_check(params: u2.U2Params, asym: u2.U2Asymptotics) -> Callable[[Grid], list[ResidualReport]]:
    return lambda grid: check_u2(u2.minimize(params, asym, grid))


# ------------------------------------------------------------ electroweak

def check_ew(res: ew.EwResult) -> list[ResidualReport]:
    """First-order equations for ``P, Z`` and the second-order pair for ``ln w``, ``ln phi``."""
    prob = res.problem
    p, grid = prob.params, prob.grid
    h, g, th, phi0 = grid.h, p.g, p.theta, p.phi0
    f = ew.reconstruct_fields(res)
    w, phi = f["w"], f["phi"]
    mask = (w > EXCLUDE_BELOW) & (phi > EXCLUDE_BELOW)
    rP = f["dP"] - (g / (2 * math.sin(th)) * phi0**2 + 2 * g * math.sin(th) * w**2)
    rZ = f["dZ"] - (g / (2 * math.cos(th)) * (phi**2 - phi0**2) + 2 * g * math.cos(th) * w**2)
    lw, lp = 0.5 * f["v1"], math.log(phi0) + 0.5 * f["v2"]
    rw = deriv2(lw, h) - (-0.5 * g**2 * phi**2 - 2 * g**2 * w**2)
    rp = deriv2(lp, h) - (g**2 / (4 * math.cos(th) ** 2) * (phi**2 - phi0**2) + g**2 * w**2)
    sf = 10 * res.optim.grad_norm * max(1.0, 1 / prob.t2)
    return [_report("ew: P'", rP, h, mask, _d1_floor(f["P"], h)),
            _report("ew: Z'", rZ, h, mask, _d1_floor(f["Z"], h)),
            _report("ew: (ln w)''", rw, h, mask, _d2_floor(lw, h) + sf),
            _report("ew: (ln phi)''", rp, h, mask, _d2_floor(lp, h) + sf)]


def ew_kkt_residual(res: ew.EwResult, xi1: float = -1.0, xi2: float = 4.0) -> float:
    """Sup-norm of the discrete eta equations with the multipliers substituted."""
    prob = res.problem
    p = prob.params
    h, t2, w = prob.grid.h, prob.t2, prob.w
    from .optim import stiffness_apply
    e1, e2 = res.eta1, res.eta2
    b1 = p.g**2 * p.phi0**2 * np.exp(prob.lnU + 0.5 * (e1 - e2))
    b2 = p.g**2 * np.exp(prob.lnV + e2)
    r1 = (stiffness_apply(e1, h) / w - prob.bg.src1) / t2 - xi1 * b1
    r2 = stiffness_apply(e2, h) / w - prob.bg.src2 + xi1 * b1 - xi2 * b2
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def ew_check(params: ew.EwParams, asym: ew.EwAsymptotics) -> Callable[[Grid], list[ResidualReport]]:
    return lambda grid: check_ew(ew.minimize_constrained(params, asym, grid))


# ----------------------------------------------------------- gradients

@dataclass
class FDReport:
    worst: float
    errors: list[float] = field(default_factory=list)
    abs_errors: list[float] = field(default_factory=list)
    slopes: list[float] = field(default_factory=list)
    # |f(x0)| eps / h_fd: absolute FD error attainable in double precision
    rounding: float = 0.0

    def consistent(self, rel: float = 1e-6, rounding_factor: float = 100.0) -> bool:
        """Every direction within ``rel`` relative or within the rounding bound absolute."""
        return all(a <= max(rel * abs(s), rounding_factor * self.rounding)
                   for a, s in zip(self.abs_errors, self.slopes))


def gradient_fd_harness(fun: Callable[[np.ndarray], float], grad: Callable[[np.ndarray], np.ndarray],
                        x0, n_directions: int = 20, h_fd: float = 1e-5, seed: int = 0,
                        project: Callable[[np.ndarray], np.ndarray] | None = None,
                        pairing: Callable[[np.ndarray, np.ndarray], float] | None = None,
                        norm: Callable[[np.ndarray], float] | None = None) -> FDReport:
    """Compare central differences with ``pairing(grad(x0), d)`` along random unit directions.

    ``pairing`` defaults to the Euclidean dot product; pass the quadrature
    inner product when ``grad`` returns an L2 gradient.  ``project`` maps
    directions into an admissible subspace before normalization.  ``norm``
    (Euclidean by default) defines "unit"; for nodal values of a function
    the discrete L2 norm keeps directional derivatives mesh independent.
    """
    x0 = np.asarray(x0, dtype=float)
    rng = np.random.default_rng(seed)
    g = grad(x0)
    pair = pairing or (lambda a, b: float(np.dot(a, b)))
    errs, abs_errs, slopes = [], [], []
    for _ in range(n_directions):
        d = rng.standard_normal(x0.size)
        if project is not None:
            d = project(d)
        d /= norm(d) if norm is not None else np.linalg.norm(d)
        fd = (fun(x0 + h_fd * d) - fun(x0 - h_fd * d)) / (2 * h_fd)
        an = pair(g, d)
        errs.append(abs(fd - an) / (abs(an) + EPS))
        abs_errs.append(abs(fd - an))
        slopes.append(an)
    return FDReport(max(errs), errs, abs_errs, slopes, EPS * abs(fun(x0)) / h_fd)


# ------------------------------------------------------------ full suite

def residual_suite(quick: bool = False) -> list[RefinementCheck]:
    """BPS-implies-second-order checks for every system, each at h and h/2."""
    n_u2 = 1501 if quick else 3001
    checks = []
    checks += refine(ah_wall_check(2.0), aw.default_grid(2.0, 4001))
    checks += refine(w_condensate_check(), Grid.symmetric(4.0, 2001))
    checks += refine(cs_check("rel_topological", 1.0, 0.5), Grid.symmetric(10.0, 4001))
    checks += refine(cs_check("rel_lump", 1.0, 0.5), Grid.symmetric(10.0, 4001))
    checks += refine(cs_check("jp_pos_kappa", 1.0, 1.0), Grid.symmetric(10.0, 4001))
    p2, a2 = u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2.0, 1.0, 1.0, 1.0)
    checks += refine(u2_check(p2, a2), u2.default_grid(p2, n_u2))
    pe, ae = ew.EwParams.from_angle(1.0, math.pi / 4, 1.0), ew.EwAsymptotics(1.5, 1.5, -2.0, -2.0)
    checks += refine(ew_check(pe, ae), ew.default_grid(pe, ae, n_u2))
    return checks
