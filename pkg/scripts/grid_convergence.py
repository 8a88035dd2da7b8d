"""Mesh study: how the U(2) and electroweak observables move as n grows.

For each n the script reports the U(2) identity residuals, the electroweak
multipliers and KKT residual, and the BPS-to-second-order residual constant
C = r / h^2 for the U(2) gauge equation.

    python scripts/grid_convergence.py
"""

import math

import numpy as np

from domainwall import ew_minimizer as ew
from domainwall import u2_minimizer as u2
from domainwall import verify as vf


def main():
    pu, au = u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2, 1, 1, 1)
    pe, ae = ew.EwParams.from_angle(1.0, math.pi / 4), ew.EwAsymptotics(1.5, 1.5, -2.0, -2.0)
    print(f"{'n':>6} {'h_u2':>8} {'u2 ident':>9} {'C(a`)':>9} {'iters':>5} | "
          f"{'xi1 + 1':>9} {'xi2 - 4':>9} {'kkt':>8} {'iters':>5}")
    for n in (751, 1501, 3001, 6001, 12001):
        r = u2.minimize(pu, au, u2.default_grid(pu, n))
        rep = {c.label: c for c in vf.check_u2(r)}["u2: a'"]
        e = ew.minimize_constrained(pe, ae, ew.default_grid(pe, ae, n))
        m = ew.recover_multipliers(e)
        print(f"{n:6d} {r.problem.grid.h:8.5f} {max(r.identity_residuals):9.1e} "
              f"{rep.residual / rep.h**2:9.4f} {r.optim.n_iter:5d} | {m.xi1 + 1:9.1e} {m.xi2 - 4:9.1e} "
              f"{vf.ew_kkt_residual(e):8.1e} {e.optim.n_iter:5d}")


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
