"""Limited-memory quasi-Newton minimizer with a user supplied initial inverse Hessian.

The discretized functionals here are stiff (their Hessians contain a
second-difference operator), so plain L-BFGS crawls.  Supplying ``H0`` as
the inverse of a banded SPD approximation (the Sobolev Gram matrix, or the
exact Hessian when that is banded) restores mesh-independent convergence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solveh_banded
from scipy.optimize import line_search
try:
    from scipy.optimize._linesearch import LineSearchWarning
except ImportError:  # private module path
    LineSearchWarning = Warning


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    n_iter: int
    n_eval: int
    converged: bool
    message: str
    history: list[float] = field(default_factory=list)


class _Cache:
    """Evaluate ``fun_grad`` once per point for the separate f / f' callbacks of line_search."""

    def __init__(self, fun_grad):
        self.fun_grad = fun_grad
        self.key = None
        self.val = None
        self.count = 0

    def __call__(self, x):
        key = x.tobytes()
        if key != self.key:
            self.val = self.fun_grad(x)
            self.key = key
            self.count += 1
        return self.val

    def f(self, x):
        return self(x)[0]

    def g(self, x):
        return self(x)[1]


def lbfgs(fun_grad: Callable[[np.ndarray], tuple[float, np.ndarray]], x0,
          apply_h0: Callable[[np.ndarray, np.ndarray], np.ndarray],
          grad_norm: Callable[[np.ndarray], float], tol: float = 1e-8,
          max_iter: int = 2000, memory: int = 10,
          project: Callable[[np.ndarray], np.ndarray] | None = None) -> OptimResult:
    """Minimize with two-loop L-BFGS and a strong-Wolfe line search.

    ``fun_grad(x)`` returns the value and the Euclidean gradient.
    ``apply_h0(x, q)`` applies the initial inverse Hessian at ``x`` to ``q``.
    ``grad_norm(g)`` is the convergence measure compared with ``tol``.
    ``project`` (optional) maps iterates back onto an invariant subspace; the
    objective must be unchanged by it.  When the line search fails, one
    preconditioned steepest-descent step with backtracking is taken and the
    curvature memory is cleared.
    """
    ev = _Cache(fun_grad)
    x = np.array(x0, dtype=float)
    if project is not None:
        x = project(x)
    f, g = ev(x)
    f_prev = None
    S: list[np.ndarray] = []
    Y: list[np.ndarray] = []
    hist = [f]
    gn = grad_norm(g)
    it = 0
    stalls = 0
    while gn > tol and it < max_iter:
        it += 1
        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(S), reversed(Y)):
            a = np.dot(s, q) / np.dot(y, s)
            alphas.append(a)
            q -= a * y
        r = apply_h0(x, q)
        for (s, y), a in zip(zip(S, Y), reversed(alphas)):
            b = np.dot(y, r) / np.dot(y, s)
            r += (a - b) * s
        p = -r
        if not np.dot(p, g) < 0:
            p = -apply_h0(x, g)
            S.clear()
            Y.clear()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LineSearchWarning)
            step = line_search(ev.f, ev.g, x, p, g, f, f_prev, c1=1e-4, c2=0.9, maxiter=30)[0]
        if step is None:
            S.clear()
            Y.clear()
            p = -apply_h0(x, g)
            step = _backtrack(ev, x, f, g, p)
            if step is None:
                stalls += 1
                if stalls >= 2:
                    break
                continue
        x_new = x + step * p
        if project is not None:
            x_new = project(x_new)
        f_new, g_new = ev(x_new)
        s, y = x_new - x, g_new - g
        if np.dot(s, y) > 1e-14 * np.linalg.norm(s) * np.linalg.norm(y):
            S.append(s)
            Y.append(y)
            if len(S) > memory:
                S.pop(0)
                Y.pop(0)
        f_prev, f, x, g = f, f_new, x_new, g_new
        hist.append(f)
        gn = grad_norm(g)
        stalls = 0
    conv = gn <= tol
    msg = "converged" if conv else ("iteration cap reached" if it >= max_iter else "line search stalled")
    return OptimResult(x, float(f), float(gn), it, ev.count, conv, msg, hist)


def _backtrack(ev, x, f, g, p, shrink=0.5, tries=40):
    slope = float(np.dot(g, p))
    if not slope < 0:
        return None
    t = 1.0
    for _ in range(tries):
        if ev.f(x + t * p) <= f + 1e-4 * t * slope:
            return t
        t *= shrink
    return None


# ------------------------------------------------------------ banded helpers

def stiffness_bands(n: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of ``sum_cells (d u)^2 / h`` differentiated twice."""
    diag = np.full(n, 2.0 / h)
    diag[0] = diag[-1] = 1.0 / h
    off = np.full(n - 1, -1.0 / h)
    return diag, off


def stiffness_apply(u: np.ndarray, h: float) -> np.ndarray:
    """``K u`` for the cell-based stiffness matrix (natural boundary)."""
    d = np.diff(u) / h
    out = np.zeros_like(u)
    out[:-1] -= d
    out[1:] += d
    return out


class PairOperator:
    """SPD operator ``G (x) K + diag(m)`` on two interleaved fields.

    ``G`` is a 2x2 SPD kinetic matrix, ``K`` the stiffness matrix and ``m``
    a length ``2n`` nonnegative mass vector stored as ``(m1, m2)``.  Solves
    use a banded Cholesky with lower bandwidth 3 on the interleaved ordering
    ``(a0, b0, a1, b1, ...)``.
    """

    def __init__(self, G, n: int, h: float, m1, m2):
        G = np.asarray(G, dtype=float)
        d, o = stiffness_bands(n, h)
        ab = np.zeros((4, 2 * n))
        ab[0, 0::2] = G[0, 0] * d + m1
        ab[0, 1::2] = G[1, 1] * d + m2
        ab[1, 0::2] = G[1, 0] * d  # (a_i, b_i)
        ab[1, 1:-1:2] = G[0, 1] * o  # (b_i, a_{i+1})
        ab[2, 0:-2:2] = G[0, 0] * o  # (a_i, a_{i+1})
        ab[2, 1:-2:2] = G[1, 1] * o  # (b_i, b_{i+1})
        ab[3, 0:-3:2] = G[0, 1] * o  # (a_i, b_{i+1})
        self.ab = ab
        self.n = n

    def solve(self, r: np.ndarray) -> np.ndarray:
        n = self.n
        rr = np.empty(2 * n)
        rr[0::2], rr[1::2] = r[:n], r[n:]
        z = solveh_banded(self.ab, rr, lower=True, check_finite=False)
        return np.concatenate([z[0::2], z[1::2]])
