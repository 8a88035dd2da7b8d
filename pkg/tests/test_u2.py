import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domainwall import abelian_wall as aw
from domainwall import u2_minimizer as u2
from domainwall.verify import gradient_fd_harness


def _l2_norm(prob):
    w2 = np.concatenate([prob.w, prob.w])
    return lambda d: math.sqrt(float(np.dot(w2, d * d)))


def test_params_and_gamma_inverse():
    p = u2.U2Params(1.0, 2.0, 1.5)
    assert p.lam == pytest.approx(0.75)
    assert p.g == pytest.approx(math.sqrt(2))
    assert p.gamma_matrix() @ p.gamma_inv() == pytest.approx(np.eye(2))
    assert sorted(np.linalg.eigvalsh(p.gamma_matrix())) == pytest.approx([2.0, 4.0])
    with pytest.raises(ValueError):
        u2.U2Params(1.0, -1.0)


@given(g=st.floats(0.2, 5), a=st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_kappa_constants_sum_and_swap(g, a):
    k1, k2 = u2.kappa_constants(*a, g)
    # eigenvector (1,1) of Gamma^{-1} has eigenvalue 1/2
    assert k1 + k2 == pytest.approx(a[0] + a[1] + a[2] + a[3], abs=1e-9)
    s = u2.U2Asymptotics(*a).swapped()
    assert s.kappas(g) == pytest.approx((k2, k1), abs=1e-12)


def test_admissibility_names_condition():
    with pytest.raises(ValueError, match="kappa2"):
        u2.U2Asymptotics(3, 3, -2, -2).check(2.0)


@pytest.mark.parametrize("gamma,asym,exact", [
    (1.0, (1, 1, 1, 1), (2.0, 2.0)),
    (2.0, (2, 1, 1, 1), (2.75, 2.25)),
])
def test_q_integrals(gamma, asym, exact):
    p, a = u2.U2Params(1.0, gamma), u2.U2Asymptotics(*asym)
    assert u2.theorem_integrals(p, a) == pytest.approx(exact)
    res = u2.minimize(p, a)
    assert res.converged
    assert res.q_integrals == pytest.approx(exact, rel=1e-6)
    rep = u2.theorem41_report(res)
    assert rep.passed, [(t.label, t.measured, t.expected) for t in rep.tails if not t.passed]
    assert rep.end_flatness < 1e-6


def test_symmetric_data_reduces_to_abelian_lump():
    p, a = u2.U2Params(1.0, 1.5), u2.U2Asymptotics(1, 1, 1, 1)
    res = u2.minimize(p, a)
    assert np.max(np.abs(res.eta1 - res.eta2)) < 1e-6
    u1, _ = res.u()
    g = res.problem.grid
    i0 = g.n // 2
    assert u1.argmax() == i0
    lump = aw.solve_magnetic_to_magnetic(2 * p.lam, 0.0, float(u1[i0]), g)
    assert np.max(np.abs(lump.u - u1)) < 1e-4


@settings(max_examples=5)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_starts_agree(seed):
    p, a = u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2, 1, 1, 0.5)
    ref = u2.minimize(p, a)
    rng = np.random.default_rng(seed)
    x = ref.problem.grid.x
    init = [rng.normal() * np.cos(rng.uniform(0.1, 2) * x), rng.normal() * np.tanh(x) + rng.normal()]
    other = u2.minimize(p, a, init=init)
    assert other.converged
    assert np.max(np.abs(other.eta1 - ref.eta1)) < 1e-6
    assert np.max(np.abs(other.eta2 - ref.eta2)) < 1e-6


def test_swap_symmetry():
    p, a = u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2, 1, 1, 0.5)
    r1, r2 = u2.minimize(p, a), u2.minimize(p, a.swapped())
    assert np.max(np.abs(r1.eta1 - r2.eta2)) < 1e-7
    assert r1.q_integrals == pytest.approx(r2.q_integrals[::-1], rel=1e-7)


def test_gradient_fd_at_zero():
    p, a = u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2, 1, 1, 0.5)
    prob = u2.build_problem(p, a)
    n = prob.n

    def f(z):
        return u2.functional_value(z[:n], z[n:], prob)

    def gr(z):
        return np.concatenate(u2.functional_gradient_raw(z[:n], z[n:], prob))

    rep = gradient_fd_harness(f, gr, np.zeros(2 * n), norm=_l2_norm(prob))
    assert rep.worst < 1e-6


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1))
def test_gradient_fd_random_points(seed):
    p, a = u2.U2Params(1.0, 1.3), u2.U2Asymptotics(1, 2, 1.5, 0.5)
    prob = u2.build_problem(p, a, u2.default_grid(p, 1501))
    n = prob.n
    rng = np.random.default_rng(seed)
    z0 = np.concatenate([np.sin(prob.grid.x * rng.uniform(0.1, 1)), rng.normal() * np.tanh(prob.grid.x)])
    rep = gradient_fd_harness(lambda z: u2.functional_value(z[:n], z[n:], prob),
                              lambda z: np.concatenate(u2.functional_gradient_raw(z[:n], z[n:], prob)),
                              z0, seed=seed % 1000, norm=_l2_norm(prob))
    assert rep.consistent()


def test_l2_gradient_vanishes_at_minimizer():
    p, a = u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2, 1, 1, 1)
    res = u2.minimize(p, a)
    g1, g2 = u2.functional_gradient(res.eta1, res.eta2, res.problem)
    assert max(np.max(np.abs(g1)), np.max(np.abs(g2))) < 1e-7
    assert max(res.identity_residuals) < 1e-8


def test_iteration_cap_reports_failure():
    res = u2.minimize(u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2, 1, 1, 1), max_iter=1)
    assert not res.converged and res.optim.message == "iteration cap reached"


def test_overflow_names_location():
    prob = u2.build_problem(u2.U2Params(), u2.U2Asymptotics(1, 1, 1, 1))
    big = np.full(prob.n, 1e4)
    with pytest.raises(OverflowError, match="overflow at x="):
        prob.exps(big, big)


def test_blend_and_beta_do_not_change_solution():
    p, a = u2.U2Params(1.0, 2.0), u2.U2Asymptotics(2, 1, 1, 1)
    r0 = u2.minimize(p, a)
    r1 = u2.minimize(p, a, beta=0.5, blend="quartic")
    assert np.max(np.abs(r1.eta1 - r0.eta1)) < 1e-8


def test_nonpositive_kappa_rejected_before_solving():
    with pytest.raises(ValueError, match="inadmissible"):
        u2.minimize(u2.U2Params(1.0, 1.0), u2.U2Asymptotics(-1, -1, 1, 1))
