"""Constrained minimization for electroweak domain walls (W-condensate lumps).

With ``v1 = 2 ln w`` and ``v2 = 2 ln(phi/phi0)`` the wall equations become a
non-symmetric Liouville system.  Passing to ``u1 = v1 + 2 v2``, ``u2 = v1`` and
``u1 = eta1 + u01 - omega``, ``u2 = eta2 + u02`` makes them variational, but
the energy is unbounded below.  It is therefore minimized only over the
quadratic part, subject to two integral constraints that fix the weighted
means of ``eta1, eta2``.  Eliminating those means leaves a coercive (not
convex) functional on mean-zero pairs, minimized here with the
preconditioned quasi-Newton method of :mod:`.optim`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from .core import Grid, Profile, TailFit, deriv1, fit_tail, quad_weights
from .optim import OptimResult, PairOperator, lbfgs, stiffness_apply
from .wspace import BackgroundPair, WeightedMeasure, build_backgrounds, build_measure


@dataclass(frozen=True)
class EwParams:
    g: float = 1.0
    g_prime: float = 1.0
    phi0: float = 1.0

    def __post_init__(self):
        if not (self.g > 0 and self.g_prime > 0 and self.phi0 > 0):
            raise ValueError("g, g' and phi0 must all be positive")

    @classmethod
    def from_angle(cls, g: float, theta: float, phi0: float = 1.0) -> "EwParams":
        if not 0 < theta < math.pi / 2:
            raise ValueError("Weinberg angle must lie in (0, pi/2)")
        return cls(g, g * math.tan(theta), phi0)

    @property
    def theta(self) -> float:
        return math.atan2(self.g_prime, self.g)

    @property
    def tan2(self) -> float:
        return (self.g_prime / self.g) ** 2

    @property
    def e(self) -> float:
        return self.g * math.sin(self.theta)

    @property
    def lam(self) -> float:
        return self.g**2 * self.phi0**2 / (2 * math.cos(self.theta) ** 2)

    @property
    def Lambda_crit(self) -> float:
        return self.g**2 / (8 * math.cos(self.theta) ** 2)


@dataclass(frozen=True)
class EwAsymptotics:
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float

    @property
    def A(self) -> float:
        return self.alpha1 + self.beta1

    @property
    def B(self) -> float:
        return abs(self.alpha2) + abs(self.beta2)

    def violations(self, params: EwParams) -> list[str]:
        t2 = params.tan2
        out = []
        if not (self.alpha2 < 0 and self.beta2 < 0):
            out.append("alpha2 < 0 and beta2 < 0")
        if not self.A > 0:
            out.append("alpha1 + beta1 > 0")
        if not self.B > self.A / t2:
            out.append("|alpha2| + |beta2| > (alpha1 + beta1)/tan^2(theta)")
        if not min(abs(self.alpha2), abs(self.beta2)) + self.A / t2 > self.B:
            out.append("min{|alpha2|, |beta2|} + (alpha1 + beta1)/tan^2(theta) > |alpha2| + |beta2|")
        return out

    def check(self, params: EwParams) -> None:
        bad = self.violations(params)
        if bad:
            raise ValueError("inadmissible electroweak asymptotics, violated: " + "; ".join(bad))

    def gammas(self, params: EwParams) -> tuple[float, float]:
        t2 = params.tan2
        g1 = self.A / (params.g**2 * params.phi0**2 * t2)
        g2 = (self.B - self.A / t2) / (4 * params.g**2)
        return g1, g2


def change_variables(v1, v2):
    """``(v1, v2) -> (u1, u2) = (v1 + 2 v2, v1)``."""
    v1 = np.asarray(v1, dtype=float)
    return v1 + 2 * np.asarray(v2, dtype=float), v1.copy()


def inverse_change_variables(u1, u2):
    u2 = np.asarray(u2, dtype=float)
    return u2.copy(), 0.5 * (np.asarray(u1, dtype=float) - u2)


def log_weights_UV(bg: BackgroundPair) -> tuple[np.ndarray, np.ndarray]:
    """``(ln U, ln V)`` with ``U = exp((u01 - u02 - omega)/2)``, ``V = exp(u02)``."""
    if not (bg.alpha2 < 0 and bg.beta2 < 0):
        raise ValueError("weights need alpha2 < 0 and beta2 < 0 to decay")
    return 0.5 * (bg.u01 - bg.u02 - bg.omega), bg.u02.copy()


def weights_UV(bg: BackgroundPair) -> tuple[np.ndarray, np.ndarray]:
    lu, lv = log_weights_UV(bg)
    return np.exp(lu), np.exp(lv)


def constraint_targets(asym: EwAsymptotics, params: EwParams) -> tuple[float, float]:
    """Right-hand sides of the two constraints: ``A`` and ``B - A/tan^2(theta)``."""
    c2 = asym.B - asym.A / params.tan2
    if not c2 > 0:
        raise ValueError("violated: |alpha2| + |beta2| > (alpha1 + beta1)/tan^2(theta)")
    return asym.A, c2


def default_beta(asym: EwAsymptotics) -> float:
    return 0.5 * min(abs(asym.alpha2), abs(asym.beta2))


def default_grid(params: EwParams, asym: EwAsymptotics, n: int = 6001) -> Grid:
    """``[-L, L]`` with ``lam L^2 / 2 > 60`` and ``min(|alpha2|, |beta2|) L > 30``."""
    m = min(abs(asym.alpha2), abs(asym.beta2))
    L = 1.05 * max(math.sqrt(120.0 / params.lam), 30.0 / m)
    return Grid.symmetric(L, n)


@dataclass
class EwProblem:
    params: EwParams
    asym: EwAsymptotics
    grid: Grid
    measure: WeightedMeasure
    bg: BackgroundPair

    def __post_init__(self):
        self.w = quad_weights(self.grid)
        self.log_w = np.log(self.w)
        self.lnU, self.lnV = log_weights_UV(self.bg)
        self.t2 = self.params.tan2
        self.gam1, self.gam2 = self.asym.gammas(self.params)
        A, B, t2 = self.asym.A, self.asym.B, self.t2
        self.const = -(A / t2) * (2 * math.log(self.gam1) + math.log(self.gam2)) + B * math.log(self.gam2)
        self.mass = self.measure.weights  # w h0
        self.mean_tol = 1e-9

    @property
    def n(self) -> int:
        return self.grid.n

    def log_LU(self, d1, d2) -> float:
        return float(logsumexp(self.log_w + self.lnU + 0.5 * (d1 - d2)))

    def log_LV(self, d2) -> float:
        return float(logsumexp(self.log_w + self.lnV + d2))

    def means(self, d1, d2) -> tuple[float, float]:
        """Means fixed by the constraints for given mean-zero parts."""
        m2 = math.log(self.gam2) - self.log_LV(d2)
        m1 = m2 + 2 * math.log(self.gam1) - 2 * self.log_LU(d1, d2)
        return m1, m2


def build_problem(params: EwParams, asym: EwAsymptotics, grid: Grid | None = None,
                  beta: float | None = None, blend: str = "quadratic") -> EwProblem:
    asym.check(params)
    constraint_targets(asym, params)
    grid = grid or default_grid(params, asym)
    beta = default_beta(asym) if beta is None else beta
    if not 0 < beta < min(abs(asym.alpha2), abs(asym.beta2)):
        raise ValueError("weight exponent must satisfy 0 < beta < min{|alpha2|, |beta2|}")
    measure = build_measure(grid, beta, blend)
    bg = build_backgrounds(grid, asym.alpha1, asym.alpha2, asym.beta1, asym.beta2, params.lam)
    return EwProblem(params, asym, grid, measure, bg)


def _check_mean_zero(prob: EwProblem, d1, d2):
    for name, d in (("eta1", d1), ("eta2", d2)):
        m = prob.measure.mean(d)
        if abs(m) > prob.mean_tol * max(1.0, float(np.max(np.abs(d)))):
            raise ValueError(f"{name} is not mean-zero with respect to dmu (mean {m:.3e})")


def _value(prob: EwProblem, d1, d2) -> float:
    h, t2 = prob.grid.h, prob.t2
    A, B = prob.asym.A, prob.asym.B
    k1, k2 = np.diff(d1), np.diff(d2)
    kin = (np.dot(k1, k1) / t2 + np.dot(k2, k2)) / (2 * h)
    src = -np.dot(prob.w * prob.bg.src1, d1) / t2 - np.dot(prob.w * prob.bg.src2, d2)
    logs = (2 * A / t2) * prob.log_LU(d1, d2) - (B - A / t2) * prob.log_LV(d2)
    return float(kin + src + logs + prob.const)


def _raw_gradient(prob: EwProblem, d1, d2) -> tuple[np.ndarray, np.ndarray]:
    h, t2 = prob.grid.h, prob.t2
    A, B = prob.asym.A, prob.asym.B
    pU = softmax(prob.log_w + prob.lnU + 0.5 * (d1 - d2))
    pV = softmax(prob.log_w + prob.lnV + d2)
    g1 = (stiffness_apply(d1, h) - prob.w * prob.bg.src1) / t2 + (A / t2) * pU
    g2 = stiffness_apply(d2, h) - prob.w * prob.bg.src2 - (A / t2) * pU - (B - A / t2) * pV
    return g1, g2


def reduced_functional(d1, d2, prob: EwProblem) -> float:
    """Constraint-eliminated functional of the mean-zero parts."""
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    _check_mean_zero(prob, d1, d2)
    return _value(prob, d1, d2)


def reduced_gradient(d1, d2, prob: EwProblem) -> tuple[np.ndarray, np.ndarray]:
    """Discrete L2 gradient; pairing it with mean-zero directions gives directional derivatives."""
    g1, g2 = _raw_gradient(prob, np.asarray(d1, float), np.asarray(d2, float))
    return g1 / prob.w, g2 / prob.w


@dataclass
class EwResult:
    problem: EwProblem
    dot1: np.ndarray
    dot2: np.ndarray
    mean1: float
    mean2: float
    optim: OptimResult
    constraint_values: tuple[float, float]
    constraint_targets: tuple[float, float]
    restarts: list[OptimResult]
    restart_spread: float

    @property
    def converged(self) -> bool:
        return self.optim.converged

    @property
    def eta1(self) -> np.ndarray:
        return self.dot1 + self.mean1

    @property
    def eta2(self) -> np.ndarray:
        return self.dot2 + self.mean2

    @property
    def constraint_residuals(self) -> tuple[float, float]:
        return tuple(abs(v / t - 1) for v, t in zip(self.constraint_values, self.constraint_targets))

    def u(self) -> tuple[np.ndarray, np.ndarray]:
        bg = self.problem.bg
        return self.eta1 + bg.u01 - bg.omega, self.eta2 + bg.u02

    def v(self) -> tuple[np.ndarray, np.ndarray]:
        return inverse_change_variables(*self.u())


def constraint_values(prob: EwProblem, eta1, eta2) -> tuple[float, float]:
    p = prob.params
    c1 = p.g**2 * p.phi0**2 * prob.t2 * math.exp(float(logsumexp(prob.log_w + prob.lnU + 0.5 * (eta1 - eta2))))
    c2 = 4 * p.g**2 * math.exp(float(logsumexp(prob.log_w + prob.lnV + eta2)))
    return c1, c2


def _smooth_random(grid: Grid, rng: np.random.Generator, amp: float = 1.0) -> np.ndarray:
    x = grid.x
    L = max(abs(grid.x_min), abs(grid.x_max))
    out = np.zeros_like(x)
    for k in range(1, 6):
        out += rng.normal() * amp / k * np.cos(k * math.pi * x / L + rng.uniform(0, 2 * math.pi))
    return out


def _solve_once(prob: EwProblem, z0, tol, max_iter) -> OptimResult:
    n = prob.n
    t2 = prob.t2
    m = prob.mass
    mu = m.sum()
    w2 = np.concatenate([prob.w, prob.w])

    def proj(z):
        a, b = z[:n], z[n:]
        return np.concatenate([a - np.dot(m, a) / mu, b - np.dot(m, b) / mu])

    def fg(z):
        z = proj(z)
        a, b = z[:n], z[n:]
        g1, g2 = _raw_gradient(prob, a, b)
        # chain rule through the projection onto mean-zero functions
        g1 = g1 - m * g1.sum() / mu
        g2 = g2 - m * g2.sum() / mu
        return _value(prob, a, b), np.concatenate([g1, g2])

    op = PairOperator(np.diag([1.0 / t2, 1.0]), n, prob.grid.h, m, m)

    def h0(z, q):
        return op.solve(q)

    return lbfgs(fg, proj(np.asarray(z0, float)), h0, lambda g: float(np.max(np.abs(g / w2))),
                 tol=tol, max_iter=max_iter, memory=20, project=proj)


def minimize_constrained(params: EwParams, asym: EwAsymptotics, grid: Grid | None = None,
                         beta: float | None = None, tol: float = 1e-8, max_iter: int = 3000,
                         restarts: int = 0, seed: int = 0, blend: str = "quadratic") -> EwResult:
    """Minimize from zero, then from ``restarts`` random smooth starts.

    ``restart_spread`` is the largest sup-norm distance between the
    mean-zero parts of the main solution and any restart.
    """
    prob = build_problem(params, asym, grid, beta, blend)
    n = prob.n
    res = _solve_once(prob, np.zeros(2 * n), tol, max_iter)
    d1, d2 = res.x[:n], res.x[n:]
    rng = np.random.default_rng(seed)
    extra, spread = [], 0.0
    for _ in range(restarts):
        z0 = np.concatenate([_smooth_random(prob.grid, rng), _smooth_random(prob.grid, rng)])
        r = _solve_once(prob, z0, tol, max_iter)
        extra.append(r)
        spread = max(spread, float(np.max(np.abs(r.x - res.x))))
    m1, m2 = prob.means(d1, d2)
    cv = constraint_values(prob, d1 + m1, d2 + m2)
    return EwResult(prob, d1, d2, m1, m2, res, cv, constraint_targets(asym, params), extra, spread)


@dataclass(frozen=True)
class Multipliers:
    xi1: float
    xi2: float
    residual: float  # weighted least-squares residual, relative
    condition: float


def recover_multipliers(res: EwResult) -> Multipliers:
    """Least-squares ``(xi1, xi2)`` from the discrete stationarity conditions."""
    prob = res.problem
    p = prob.params
    h, t2, w = prob.grid.h, prob.t2, prob.w
    e1, e2 = res.eta1, res.eta2
    G1 = (stiffness_apply(e1, h) / w - prob.bg.src1) / t2
    G2 = stiffness_apply(e2, h) / w - prob.bg.src2
    b1 = p.g**2 * p.phi0**2 * np.exp(prob.lnU + 0.5 * (e1 - e2))
    b2 = p.g**2 * np.exp(prob.lnV + e2)
    sw = np.sqrt(w)
    M = np.zeros((2 * prob.n, 2))
    M[: prob.n, 0] = sw * b1
    M[prob.n:, 0] = -sw * b1
    M[prob.n:, 1] = sw * b2
    rhs = np.concatenate([sw * G1, sw * G2])
    cond = float(np.linalg.cond(M))
    if not cond < 1e12:
        raise np.linalg.LinAlgError(f"constraint gradients numerically dependent (cond {cond:.3e})")
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    r = rhs - M @ sol
    return Multipliers(float(sol[0]), float(sol[1]),
                       float(np.linalg.norm(r) / max(np.linalg.norm(rhs), 1e-300)), cond)


def reconstruct_fields(res: EwResult) -> Profile:
    """``w, phi, P, Z`` from the minimizer; ``Z`` from the phi equation, ``P`` from the w equation."""
    prob = res.problem
    p = prob.params
    th = p.theta
    h = prob.grid.h
    v1, v2 = res.v()
    # differentiate v itself: the discrete v solves a smooth three-point
    # scheme, while eta alone inherits the limited smoothness of u0
    dv1, dv2 = deriv1(v1, h), deriv1(v2, h)
    Z = (math.cos(th) / p.g) * dv2
    P = -(dv1 / (2 * p.g) + math.cos(th) * Z) / math.sin(th)
    w = np.exp(0.5 * v1)
    phi = p.phi0 * np.exp(0.5 * v2)
    return Profile(prob.grid, {"w": w, "phi": phi, "P": P, "Z": Z, "v1": v1, "v2": v2,
                               "dP": deriv1(P, h), "dZ": deriv1(Z, h)})


def theorem_integrals(params: EwParams, asym: EwAsymptotics) -> tuple[float, float]:
    """Exact ``(int w^2, int phi^2)``."""
    t2 = params.tan2
    return (asym.B - asym.A / t2) / (4 * params.g**2), asym.A / (params.g**2 * t2)


@dataclass
class EwTailCheck:
    label: str
    measured: float
    expected: float
    rel_tol: float
    fit: TailFit

    @property
    def rel_error(self) -> float:
        return abs(self.measured - self.expected) / abs(self.expected)

    @property
    def passed(self) -> bool:
        return self.rel_error <= self.rel_tol


@dataclass
class Th2Report:
    tails: list[EwTailCheck]
    integrals: list[tuple[str, float, float]]
    flagged: list[str]

    def integral_rel_errors(self) -> list[float]:
        return [abs(m / e - 1) for _, m, e in self.integrals]

    @property
    def passed(self) -> bool:
        return (all(t.passed for t in self.tails) and not self.flagged
                and all(r <= 1e-3 for r in self.integral_rel_errors()))


def theorem_th2_report(res: EwResult) -> Th2Report:
    prob = res.problem
    p, a, grid = prob.params, prob.asym, prob.grid
    v1, v2 = res.v()
    ln_w2 = v1
    ln_phi2 = 2 * math.log(p.phi0) + v2
    lam = p.lam
    xr = min(grid.x_max - 1.0, math.sqrt(1200.0 / lam))
    x_in = max(3.0, 0.4 * xr)
    right, left = (x_in, xr), (-xr, -x_in)
    tails, flagged = [], []
    fwr = fit_tail(ln_w2, grid, right, "linear")
    fwl = fit_tail(ln_w2, grid, left, "linear")
    fpr = fit_tail(ln_phi2, grid, right, "linear-plus-quadratic")
    fpl = fit_tail(ln_phi2, grid, left, "linear-plus-quadratic")
    qexp = -p.g**2 * p.phi0**2 / (4 * math.cos(p.theta) ** 2)
    tails += [EwTailCheck("ln w^2 right slope", fwr.linear, a.alpha2, 0.02, fwr),
              EwTailCheck("ln w^2 left slope", fwl.linear, abs(a.beta2), 0.02, fwl),
              EwTailCheck("ln phi^2 right quadratic", fpr.quadratic, qexp, 0.02, fpr),
              EwTailCheck("ln phi^2 left quadratic", fpl.quadratic, qexp, 0.02, fpl)]
    lin_r = 0.5 * (a.alpha1 + abs(a.alpha2))
    lin_l = -0.5 * (a.beta1 + abs(a.beta2))
    if abs(lin_r) > 1e-12:
        tails.append(EwTailCheck("ln phi^2 right linear", fpr.linear, lin_r, 0.05, fpr))
    if abs(lin_l) > 1e-12:
        tails.append(EwTailCheck("ln phi^2 left linear", fpl.linear, lin_l, 0.05, fpl))
    for f in (fwr, fwl, fpr, fpl):
        if f.residual_rms > 1e-3 * max(1.0, abs(f.constant)):
            flagged.append(f"poor tail fit on {f.window}: rms {f.residual_rms:.3e}")
    fields = reconstruct_fields(res)
    wsq = fields["w"] ** 2
    phisq = fields["phi"] ** 2
    exact = theorem_integrals(p, a)
    integrals = [("int w^2", float(np.dot(prob.w, wsq)), exact[0]),
                 ("int phi^2", float(np.dot(prob.w, phisq)), exact[1])]
    return Th2Report(tails, integrals, flagged)


def admissible_lattice() -> list[tuple[EwParams, EwAsymptotics]]:
    """Six parameter points (two angles, three asymptotic sets each) that satisfy every admissibility inequality."""
    out = []
    for (g, th, phi0), sets in [
        ((1.0, math.pi / 4, 1.0), [(1.5, 1.5, -2.0, -2.0), (1.0, 1.0, -1.5, -1.0), (2.0, 1.0, -2.0, -2.5)]),
        ((1.2, math.pi / 3, 0.8), [(3.0, 3.0, -1.5, -1.5), (2.0, 4.0, -1.0, -1.5), (3.0, 3.0, -1.0, -1.2)]),
    ]:
        p = EwParams.from_angle(g, th, phi0)
        for s in sets:
            a = EwAsymptotics(*s)
            a.check(p)
            out.append((p, a))
    return out
