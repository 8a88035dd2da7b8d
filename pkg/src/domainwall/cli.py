"""Command-line runs that emit profile CSVs and summary JSON files.

Every subcommand resolves its configuration as defaults, then an optional
JSON file (``--config``), then explicit flags, and embeds the result in the
summary.  Exit codes: 0 success, 1 invalid configuration, 2 a solver did
not converge or a verification failed, 3 file-system error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import abelian_wall as aw
from . import ew_minimizer as ew
from . import liouville_cs as cs
from . import u2_minimizer as u2
from . import verify as vf
from .core import Grid, deriv1, deriv2, fit_tail, integrate

EXIT_OK, EXIT_INVALID, EXIT_CONVERGENCE, EXIT_IO = 0, 1, 2, 3


class ConvergenceFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    out: str = "."
    prefix: str | None = None
    seed: int = 0

    def stem(self) -> Path:
        return Path(self.out) / (self.prefix or self.subcommand)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunOutput:
    columns: dict[str, np.ndarray] | None
    summary: dict
    ok: bool = True


# --------------------------------------------------------------- output

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in data:
            w.writerow(["%.16e" % v for v in row])


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------- helpers

def _grid(p: dict, default: Grid) -> Grid:
    L, n = p.get("L"), p.get("n")
    if L is None and n is None:
        return default
    L = L if L is not None else max(-default.x_min, default.x_max)
    n = int(n) if n is not None else default.n
    if not (L > 0 and n >= 3):
        raise ValueError("grid needs L > 0 and n >= 3")
    return Grid.symmetric(float(L), n)


def _fit(values, grid, window, model="linear"):
    f = fit_tail(values, grid, window, model)
    return {"window": list(f.window), "model": f.model, "coefficients": list(f.coefficients),
            "residual_rms": f.residual_rms}


def _reports(reps):
    return [r.to_dict() for r in reps]


# ------------------------------------------------------------ Abelian runs

def _ah_columns(u, du, params: aw.AbelianHiggsParams):
    e, xi = params.e, params.xi
    phi = math.sqrt(xi) * np.exp(0.5 * u)
    A = -du / (2 * e)
    dphi = 0.5 * phi * du
    dA = e * (xi - phi**2)
    dens = 0.5 * dA**2 + dphi**2 + e**2 * A**2 * phi**2 + 0.5 * e**2 * (phi**2 - xi) ** 2
    return {"u": u, "du": du, "phi": phi, "A": A, "energy_density": dens}


def run_ah_wall(p: dict, seed: int) -> RunOutput:
    params = aw.AbelianHiggsParams(p["e"], p["xi"])
    lam = params.lam
    grid = _grid(p, aw.default_grid(lam))
    sol = aw.solve_higgs_to_magnetic(params, grid, p["x_ref"], p["u_ref"])
    cols = _ah_columns(sol.u, sol.du, params)
    L = grid.x_max
    mask = sol.u < 0
    left = (grid.x_min + 0.1 * L, -0.3 * L)
    summary = {
        "lambda": lam, "tails_resolved": sol.tails_resolved, "notes": sol.notes,
        "energy": integrate(cols["energy_density"], grid),
        "right_tail_u": _fit(sol.u, grid, (0.3 * L, 0.9 * L), "linear-plus-quadratic"),
        "right_tail_expected_quadratic": -lam / 2,
        "left_tail_ln_minus_u": _fit(np.log(-np.where(mask, sol.u, -1.0)), grid, left),
        "left_tail_expected_slope": math.sqrt(lam),
        "residuals": _reports(vf.check_ah_second_order(sol.u, sol.du, grid, params)),
    }
    return RunOutput({"x": grid.x, **cols}, summary)


def run_ah_lump(p: dict, seed: int) -> RunOutput:
    params = aw.AbelianHiggsParams(p["e"], p["xi"])
    grid = _grid(p, aw.default_grid(params.lam))
    sol = aw.solve_magnetic_to_magnetic(params, p["x0"], p["u0"], grid)
    cols = _ah_columns(sol.u, sol.du, params)
    summary = {"lambda": params.lam, "energy": integrate(cols["energy_density"], grid),
               "residuals": _reports(vf.check_ah_second_order(sol.u, sol.du, grid, params))}
    return RunOutput({"x": grid.x, **cols}, summary)


def _general_run(gp: aw.GeneralLiouvilleParams, p: dict) -> tuple[aw.WallSolution, dict]:
    grid = _grid(p, Grid.symmetric(10.0, 4001))
    sol = aw.solve_general(gp, grid, p["x_ref"], p["u_ref"], p["du_ref"])
    rc = aw.riccati_first_integral_check(sol, gp)
    info = {"lambda": gp.lam, "epsilon": gp.eps, "blew_up": sol.blew_up, "notes": sol.notes,
            "interval": [sol.profile.grid.x_min, sol.profile.grid.x_max],
            "first_integral_drift": aw.first_integral_drift(sol, gp),
            "riccati": asdict(rc)}
    return sol, info


def run_w_condensate(p: dict, seed: int) -> RunOutput:
    e, m_w = p["e"], p["m_w"]
    gp = aw.GeneralLiouvilleParams.w_condensate(e, m_w)
    sol, info = _general_run(gp, p)
    g = sol.profile.grid
    W = np.exp(0.5 * sol.u)
    P = -sol.du / (2 * e)
    dP = deriv1(P, g.h)
    dens = 0.5 * dP**2 + 2 * m_w**2 * W**2 - 2 * e * dP * W**2 + 2 * e**2 * W**4
    info["residuals"] = _reports(vf.check_w_condensate(sol.u, sol.du, g, e, m_w))
    return RunOutput({"x": g.x, "u": sol.u, "du": sol.du, "W": W, "P": P, "energy_density": dens}, info)


def run_general(p: dict, seed: int) -> RunOutput:
    gp = aw.GeneralLiouvilleParams(p["lam"], p["eps"])
    sol, info = _general_run(gp, p)
    return RunOutput({"x": sol.profile.grid.x, "u": sol.u, "du": sol.du}, info)


# ------------------------------------------------------- Chern–Simons runs

def run_jp(p: dict, seed: int) -> RunOutput:
    kappa, m, x0, u0 = p["kappa"], p["m"], p["x0"], p["u0"]
    jp = cs.JackiwPiParams(kappa, m)
    grid = _grid(p, Grid.symmetric(10.0, 4001))
    x, h = grid.x, grid.h
    if kappa > 0:
        u = cs.jp_exact(x, kappa, x0, u0)
        du = cs.jp_exact_du(x, kappa, x0, u0)
        rho = np.exp(u)
        A = -0.5 * du
        dens = (0.25 * rho * du**2 + A**2 * rho) / (2 * m) - 0.5 * jp.g_c * rho**2
        summary = {"branch": "kappa>0", "charge": integrate(rho, grid),
                   "residuals": _reports(vf.check_cs_second_order("jp_pos_kappa", grid, kappa, x0,
                                                                  math.exp(u0 / 2), m))}
        return RunOutput({"x": x, "u": u, "du": du, "rho": rho, "A": A, "energy_density": dens}, summary)
    u = cs.jp_exact_negk(x, kappa, x0, u0)
    half = cs.jp_negk_existence_halfwidth(kappa, u0)
    inside = np.abs(x - x0) < half
    local = np.full_like(x, np.nan)
    local[inside] = cs.jp_negk_local(x[inside], kappa, x0, u0)
    ode = np.abs(deriv2(u, h) + (2 / kappa) * np.exp(u))[1:-1]
    summary = {"branch": "kappa<0", "existence_halfwidth": half,
               "tanh2_profile_ode_residual": float(ode.max()),
               "note": "u_tanh2 is bounded but does not solve the equation; u_local is the solution "
                       "through the same minimum and is finite only inside the existence interval"}
    return RunOutput({"x": x, "u_tanh2": u, "u_local": local}, summary)


def run_cs_wall(p: dict, seed: int) -> RunOutput:
    kappa, phi0, x0 = p["kappa"], p["phi0"], p["x0"]
    lam = cs.RelCSParams(kappa).lam
    grid = _grid(p, cs.topwall_grid(kappa, x0, 20001))
    phi = cs.rel_topwall_phi(grid.x, lam, x0, phi0)
    dphi = 0.5 * phi * cs.rel_topwall_du(grid.x, lam, x0, 2 * math.log(phi0))
    dens = cs.energy_density(phi, dphi, kappa)
    we = cs.wall_energy(kappa, phi0, x0)
    a, b = p["trunc_a"], p["trunc_b"]
    qm, qe = cs.charges(kappa, phi0, x0)
    summary = {"energy_analytic": we.analytic, "energy_quadrature": we.quadrature,
               "quadrature_interval": list(we.interval),
               "truncated_interval": [a, b], "truncated_energy": cs.truncated_energy(kappa, a, b, phi0, x0),
               "magnetic_charge": qm, "electric_charge": qe,
               "residuals": _reports(vf.check_cs_second_order("rel_topological", grid, kappa, x0, phi0))}
    return RunOutput({"x": grid.x, "phi": phi, "dphi": dphi, "energy_density": dens}, summary)


def run_cs_lump(p: dict, seed: int) -> RunOutput:
    kappa, phi0, x0, form = p["kappa"], p["phi0"], p["x0"], p["form"]
    lam = cs.RelCSParams(kappa).lam
    grid = _grid(p, Grid.symmetric(10.0, 4001))
    phi = cs.rel_lump_phi(grid.x, lam, x0, phi0, form)
    dphi = deriv1(phi, grid.h) if form == "printed" else 0.5 * phi * cs.rel_lump_du(grid.x, lam, x0, 2 * math.log(phi0))
    dens = cs.energy_density(phi, dphi, kappa)
    full = cs.lump_energy(kappa, phi0, form)
    part = cs.lump_energy(kappa, phi0, form, p["upper"])
    summary = {"form": form, "decay_rate": cs.lump_rate(lam, 2 * math.log(phi0)),
               "energy_full_line": asdict(full), "energy_truncated": asdict(part),
               "residuals": _reports(vf.check_cs_second_order("rel_lump", grid, kappa, x0, phi0))
               if form == "exact" else []}
    return RunOutput({"x": grid.x, "phi": phi, "dphi": dphi, "energy_density": dens}, summary)


def run_cs_energy_curve(p: dict, seed: int) -> RunOutput:
    kappas = p["kappa"]
    if isinstance(kappas, (int, float)):
        kappas = [kappas]
    n = int(p["n_phi"])
    phis = np.round(np.linspace(0.01, 0.99, n), 12)
    cols = {"phi0": phis}
    monotone = {}
    for k in kappas:
        rows = cs.energy_curve(float(k), phis, p["form"])
        e = np.array([r["energy"] for r in rows])
        cols[f"energy_kappa={k:g}"] = e
        monotone[f"{k:g}"] = bool(np.all(np.diff(e) > 0))
    return RunOutput(cols, {"form": p["form"], "kappas": list(kappas), "increasing_in_phi0": monotone})


# ----------------------------------------------------------- variational

def _u2_energy_density(prof, params: u2.U2Params, h):
    e, g, xi = params.e, params.g, params.xi
    u1, u2_ = prof["u1"], prof["u2"]
    q1, q2 = np.sqrt(xi) * np.exp(0.5 * u1), np.sqrt(xi) * np.exp(0.5 * u2_)
    l1, l2 = 0.5 * deriv1(u1, h), 0.5 * deriv1(u2_, h)
    a, A = -(l1 + l2) / e, -(l1 - l2) / g
    da = -0.5 * e * (q1**2 + q2**2 - 2 * xi)
    dA = -0.5 * g * (q1**2 - q2**2)
    dens = (0.5 * da**2 + 0.5 * dA**2 + (l1 * q1) ** 2 + (l2 * q2) ** 2
            + ((0.5 * e * a + 0.5 * g * A) * q1) ** 2 + ((0.5 * e * a - 0.5 * g * A) * q2) ** 2
            + e**2 / 8 * (q1**2 + q2**2 - 2 * xi) ** 2 + g**2 / 8 * (q1**2 - q2**2) ** 2)
    return q1, q2, a, A, dens


def run_u2_wall(p: dict, seed: int) -> RunOutput:
    params = u2.U2Params(p["e"], p["gamma"], p["xi"])
    asym = u2.U2Asymptotics(p["alpha1"], p["beta1"], p["alpha2"], p["beta2"])
    asym.check(params.gamma)
    grid = _grid(p, u2.default_grid(params, 6001))
    res = u2.minimize(params, asym, grid, p["beta"], p["tol"], p["max_iter"], blend=p["blend"])
    prof = res.profile()
    q1, q2, a, A, dens = _u2_energy_density(prof, params, grid.h)
    rep = u2.theorem41_report(res)
    summary = {
        "lambda": params.lam, "kappas": list(asym.kappas(params.gamma)),
        "q_integrals": list(res.q_integrals), "q_integrals_exact": list(u2.theorem_integrals(params, asym)),
        "identity_residuals": list(res.identity_residuals),
        "tails": [{"label": t.label, "measured": t.measured, "expected": t.expected,
                   "rel_error": t.rel_error, "passed": t.passed} for t in rep.tails],
        "end_flatness": rep.end_flatness, "flagged": rep.flagged,
        "energy": integrate(dens, grid),
        "optimizer": {"converged": res.optim.converged, "iterations": res.optim.n_iter,
                      "evaluations": res.optim.n_eval, "grad_norm": res.optim.grad_norm,
                      "value": res.optim.fun, "message": res.optim.message},
    }
    out = RunOutput({"x": grid.x, "q1": q1, "q2": q2, "a": a, "A": A, "u1": prof["u1"],
                     "u2": prof["u2"], "energy_density": dens}, summary, res.converged)
    return out


def _ew_params(p: dict) -> ew.EwParams:
    if p.get("g_prime") is not None:
        return ew.EwParams(p["g"], p["g_prime"], p["phi0"])
    return ew.EwParams.from_angle(p["g"], p["theta"], p["phi0"])


def run_ew_wall(p: dict, seed: int) -> RunOutput:
    params = _ew_params(p)
    asym = ew.EwAsymptotics(p["alpha1"], p["beta1"], p["alpha2"], p["beta2"])
    asym.check(params)
    grid = _grid(p, ew.default_grid(params, asym, 6001))
    res = ew.minimize_constrained(params, asym, grid, p["beta"], p["tol"], p["max_iter"],
                                  p["restarts"], seed, p["blend"])
    f = ew.reconstruct_fields(res)
    g, th = params.g, params.theta
    w, phi, P, Z = f["w"], f["phi"], f["P"], f["Z"]
    dphi = deriv1(phi, grid.h)
    dP, dZ = f["dP"], f["dZ"]
    Lam = params.Lambda_crit
    dens = (0.5 * dP**2 + 0.5 * dZ**2 - 2 * g * (dZ * math.cos(th) + dP * math.sin(th)) * w**2
            + 2 * g**2 * w**4 + dphi**2 + g**2 / (4 * math.cos(th) ** 2) * phi**2 * Z**2
            + g**2 * phi**2 * w**2 + Lam * (params.phi0**2 - phi**2) ** 2)
    mult = ew.recover_multipliers(res)
    rep = ew.theorem_th2_report(res)
    summary = {
        "theta": th, "tan2_theta": params.tan2, "lambda": params.lam,
        "multipliers": asdict(mult), "multipliers_expected": [-1.0, 4.0],
        "kkt_residual": vf.ew_kkt_residual(res),
        "integrals": [{"label": l, "measured": m, "exact": e} for l, m, e in rep.integrals],
        "tails": [{"label": t.label, "measured": t.measured, "expected": t.expected,
                   "rel_error": t.rel_error, "passed": t.passed} for t in rep.tails],
        "flagged": rep.flagged,
        "constraint_values": list(res.constraint_values), "constraint_targets": list(res.constraint_targets),
        "restart_spread": res.restart_spread, "restarts": len(res.restarts),
        "optimizer": {"converged": res.optim.converged, "iterations": res.optim.n_iter,
                      "evaluations": res.optim.n_eval, "grad_norm": res.optim.grad_norm,
                      "value": res.optim.fun, "message": res.optim.message},
    }
    ok = res.converged and all(r.converged for r in res.restarts)
    return RunOutput({"x": grid.x, "w": w, "phi": phi, "P": P, "Z": Z, "energy_density": dens}, summary, ok)


def run_verify(p: dict, seed: int) -> RunOutput:
    checks = vf.residual_suite(quick=bool(p["quick"]))
    closed = vf.closed_form_ode_residuals()
    tol = p["closed_form_tol"]
    cols = {"h_coarse": [c.coarse.h for c in checks], "residual_coarse": [c.coarse.residual for c in checks],
            "residual_fine": [c.fine.residual for c in checks], "C": [c.C for c in checks],
            "threshold": [c.threshold for c in checks], "passed": [float(c.passed) for c in checks]}
    summary = {"checks": [c.to_dict() for c in checks],
               "all_passed": all(c.passed for c in checks),
               "closed_form_residuals": {k: {"residual": v, "passed": v < tol} for k, v in closed.items()},
               "closed_form_tolerance": tol, "labels": [c.label for c in checks]}
    return RunOutput({k: np.asarray(v, float) for k, v in cols.items()}, summary, summary["all_passed"])


# ---------------------------------------------------------- registry

GRID = {"L": None, "n": None}
U2_DEFAULTS = {"e": 1.0, "gamma": 1.0, "xi": 1.0, "alpha1": 1.0, "beta1": 1.0, "alpha2": 1.0,
               "beta2": 1.0, "beta": 1.0, "tol": 1e-8, "max_iter": 500, "blend": "quadratic", **GRID}
EW_DEFAULTS = {"g": 1.0, "theta": math.pi / 4, "g_prime": None, "phi0": 1.0, "alpha1": 1.5,
               "beta1": 1.5, "alpha2": -2.0, "beta2": -2.0, "beta": None, "tol": 1e-8,
               "max_iter": 3000, "restarts": 0, "blend": "quadratic", **GRID}

COMMANDS = {
    "ah-wall": (run_ah_wall, {"e": 1.0, "xi": 1.0, "x_ref": 0.0, "u_ref": -1.0, **GRID},
                "Abelian-Higgs wall from the Higgs phase to the magnetic phase"),
    "ah-lump": (run_ah_lump, {"e": 1.0, "xi": 1.0, "x0": 0.0, "u0": -1.0, **GRID},
                "Abelian-Higgs solution vanishing at both ends"),
    "w-condensate": (run_w_condensate, {"e": 1.0, "m_w": 1.0, "x_ref": 0.0, "u_ref": 0.0, "du_ref": 0.0, **GRID},
                     "W-condensate equation integrated from initial data"),
    "general-liouville": (run_general, {"lam": 1.0, "eps": 1.0, "x_ref": 0.0, "u_ref": 0.0, "du_ref": 0.0, **GRID},
                          "u'' = lam (e^u - eps) from initial data"),
    "jp": (run_jp, {"kappa": 1.0, "m": 1.0, "x0": 0.0, "u0": 0.0, **GRID},
           "nonrelativistic Chern-Simons closed forms (either sign of kappa)"),
    "cs-wall": (run_cs_wall, {"kappa": 1.0 / 3.0, "phi0": 0.5, "x0": 0.0, "trunc_a": -1.2, "trunc_b": 1.2, **GRID},
                "relativistic Chern-Simons topological wall"),
    "cs-lump": (run_cs_lump, {"kappa": 1.0, "phi0": 0.5, "x0": 0.0, "form": "exact", "upper": 6.0, **GRID},
                "relativistic Chern-Simons lump"),
    "cs-energy-curve": (run_cs_energy_curve, {"kappa": [1.0, 2.0, 4.0], "n_phi": 99, "form": "exact"},
                        "lump energy as a function of its height"),
    "u2-wall": (run_u2_wall, U2_DEFAULTS, "U(2) wall by direct minimization"),
    "ew-wall": (run_ew_wall, EW_DEFAULTS, "electroweak wall by constrained minimization"),
    "verify": (run_verify, {"quick": False, "closed_form_tol": 1e-4}, "second-order residual suite"),
}

CHOICES = {"form": ("exact", "printed"), "blend": ("quadratic", "quartic")}


def _add_param_flags(sp: argparse.ArgumentParser, defaults: dict) -> None:
    for k, v in defaults.items():
        flag = "--" + k.replace("_", "-")
        if k == "kappa" and isinstance(v, list):
            sp.add_argument(flag, dest=k, type=float, action="append", default=None,
                            help=f"repeatable (default {v})")
        elif isinstance(v, bool):
            sp.add_argument(flag, dest=k, action="store_true", default=None)
        elif isinstance(v, str):
            sp.add_argument(flag, dest=k, choices=CHOICES.get(k), default=None, help=f"default {v}")
        elif isinstance(v, int):
            sp.add_argument(flag, dest=k, type=int, default=None, help=f"default {v}")
        else:
            typ = int if k == "n" else float
            sp.add_argument(flag, dest=k, type=typ, default=None, help=f"default {v}")


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON file with parameter values; flags override it")
    sp.add_argument("--out", default=None, help="output directory (default .)")
    sp.add_argument("--prefix", default=None, help="file stem (default: subcommand name)")
    sp.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="domainwall", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name, (_, defaults, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        _add_common(sp)
        _add_param_flags(sp, defaults)
    sw = sub.add_parser("sweep", help="run a subcommand over a parameter lattice")
    _add_common(sw)
    sw.add_argument("--command", required=True, choices=sorted(COMMANDS))
    sw.add_argument("--param", action="append", default=[], metavar="NAME=V1,V2,...",
                    help="lattice axis; repeat for a product lattice")
    sw.add_argument("--jobs", type=int, default=1)
    return ap


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


def resolve(name: str, file_cfg: dict, flags: dict) -> RunConfig:
    """Merge defaults, file values and flags into a validated config."""
    defaults = COMMANDS[name][1]
    params = dict(defaults)
    file_params = file_cfg.get("params", {k: v for k, v in file_cfg.items()
                                         if k not in ("out", "prefix", "seed", "subcommand")})
    unknown = set(file_params) - set(defaults)
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    params.update(file_params)
    params.update({k: v for k, v in flags.items() if k in defaults and v is not None})
    for k, v in params.items():
        if k in CHOICES and v not in CHOICES[k]:
            raise ValueError(f"{k} must be one of {CHOICES[k]}")
    top = {k: file_cfg.get(k) for k in ("out", "prefix", "seed")}
    top.update({k: flags[k] for k in ("out", "prefix", "seed") if flags.get(k) is not None})
    return RunConfig(name, params, top["out"] or ".", top["prefix"], int(top["seed"] or 0))


def execute(cfg: RunConfig) -> int:
    """Run one resolved config and write its files; returns the exit code."""
    fn = COMMANDS[cfg.subcommand][0]
    try:
        result = fn(cfg.params, cfg.seed)
    except (ValueError, np.linalg.LinAlgError) as exc:
        _fail("validation", str(exc), cfg)
        return EXIT_INVALID
    except (ConvergenceFailure, OverflowError, FloatingPointError) as exc:
        _fail("convergence", str(exc), cfg)
        return EXIT_CONVERGENCE
    summary = {"config": cfg.to_dict(), "ok": result.ok, **result.summary}
    stem = cfg.stem()
    try:
        stem.parent.mkdir(parents=True, exist_ok=True)
        if result.columns is not None:
            write_csv(stem.with_suffix(".csv"), result.columns)
        write_json(stem.with_suffix(".json"), summary)
    except OSError as exc:
        _fail("io", str(exc), cfg)
        return EXIT_IO
    if not result.ok:
        _fail("convergence", "solver did not converge or a check failed; see summary", cfg)
        return EXIT_CONVERGENCE
    return EXIT_OK


def _fail(kind: str, msg: str, cfg: RunConfig | None) -> None:
    err = {"error": kind, "message": msg}
    if cfg is not None:
        err["config"] = cfg.to_dict()
    print(json.dumps(_jsonable(err), sort_keys=True), file=sys.stderr)


def _parse_axis(spec: str) -> tuple[str, list]:
    if "=" not in spec:
        raise ValueError(f"lattice axis {spec!r} must look like name=v1,v2")
    name, vals = spec.split("=", 1)
    out = []
    for v in vals.split(","):
        try:
            out.append(int(v) if v.strip().lstrip("-").isdigit() else float(v))
        except ValueError:
            out.append(v.strip())
    return name.strip().replace("-", "_"), out


def _sweep_entry(cfg: RunConfig) -> int:
    return execute(cfg)


def run_sweep(args, file_cfg: dict) -> int:
    try:
        axes = [_parse_axis(s) for s in args.param]
        base = resolve(args.command, file_cfg, {})
    except ValueError as exc:
        _fail("validation", str(exc), None)
        return EXIT_INVALID
    out = args.out or file_cfg.get("out") or "."
    prefix = args.prefix or f"sweep-{args.command}"
    seed = args.seed if args.seed is not None else base.seed
    names = [a[0] for a in axes]
    for nm in names:
        if nm not in base.params:
            _fail("validation", f"unknown parameter {nm!r} for {args.command}", None)
            return EXIT_INVALID
    configs = []
    for i, combo in enumerate(itertools.product(*[a[1] for a in axes])):
        params = dict(base.params)
        params.update(dict(zip(names, combo)))
        configs.append(RunConfig(args.command, params, out, f"{prefix}-{i:03d}", seed))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            codes = list(pool.map(_sweep_entry, configs))
    else:
        codes = [execute(c) for c in configs]
    index = {"command": args.command, "axes": dict(axes), "seed": seed,
             "runs": [{"prefix": c.prefix, "params": {k: c.params[k] for k in names}, "exit_code": code}
                      for c, code in zip(configs, codes)]}
    try:
        Path(out).mkdir(parents=True, exist_ok=True)
        write_json(Path(out) / f"{prefix}.json", index)
    except OSError as exc:
        _fail("io", str(exc), None)
        return EXIT_IO
    return max(codes) if codes else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_cfg = _load_config(args.config)
    except OSError as exc:
        _fail("io", str(exc), None)
        return EXIT_IO
    except ValueError as exc:
        _fail("validation", str(exc), None)
        return EXIT_INVALID
    if args.subcommand == "sweep":
        return run_sweep(args, file_cfg)
    try:
        cfg = resolve(args.subcommand, file_cfg, vars(args))
    except ValueError as exc:
        _fail("validation", str(exc), None)
        return EXIT_INVALID
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
