import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domainwall import ew_minimizer as ew
from domainwall.verify import ew_kkt_residual, gradient_fd_harness
from domainwall.wspace import project_mean_zero

P0 = ew.EwParams.from_angle(1.0, math.pi / 4, 1.0)
A0 = ew.EwAsymptotics(1.5, 1.5, -2.0, -2.0)


@pytest.fixture(scope="module")
def base():
    return ew.minimize_constrained(P0, A0)


def test_params():
    assert P0.theta == pytest.approx(math.pi / 4)
    assert P0.tan2 == pytest.approx(1.0)
    assert P0.lam == pytest.approx(1.0)
    assert P0.Lambda_crit == pytest.approx(0.25)
    with pytest.raises(ValueError):
        ew.EwParams.from_angle(1.0, 2.0)
    with pytest.raises(ValueError):
        ew.EwParams(1.0, 0.0)


@given(v1=st.lists(st.floats(-50, 50), min_size=3, max_size=3),
       v2=st.lists(st.floats(-50, 50), min_size=3, max_size=3))
def test_change_of_variables_roundtrip(v1, v2):
    u1, u2 = ew.change_variables(v1, v2)
    assert np.allclose(u1, np.array(v1) + 2 * np.array(v2)) and np.allclose(u2, v1)
    b1, b2 = ew.inverse_change_variables(u1, u2)
    assert np.allclose(b1, v1, atol=1e-12) and np.allclose(b2, v2, atol=1e-12)


@pytest.mark.parametrize("asym,needle", [
    ((1.0, 1.0, 1.0, -1.0), "alpha2 < 0 and beta2 < 0"),
    ((-1.0, 0.5, -1.0, -1.0), "alpha1 + beta1 > 0"),
    ((2.0, 2.0, -1.0, -1.0), "|alpha2| + |beta2| > (alpha1 + beta1)/tan^2(theta)"),
    ((0.1, 0.1, -2.0, -2.0), "min{|alpha2|, |beta2|}"),
])
def test_inadmissible_sets_name_inequality(asym, needle):
    a = ew.EwAsymptotics(*asym)
    with pytest.raises(ValueError, match="violated") as exc:
        a.check(P0)
    assert needle in str(exc.value)


@given(t=st.floats(0.2, 1.3), a1=st.floats(0.1, 4), b1=st.floats(0.1, 4),
       a2=st.floats(-4, -0.1), b2=st.floats(-4, -0.1))
def test_admissibility_dual_forms_agree(t, a1, b1, a2, b2):
    p = ew.EwParams.from_angle(1.0, t)
    a = ew.EwAsymptotics(a1, b1, a2, b2)
    t2 = p.tan2
    lhs = min(abs(a2), abs(b2)) + a.A / t2 > a.B
    rhs = min(abs(a2), abs(b2)) > a.B - a.A / t2
    assert lhs == rhs
    bad = a.violations(p)
    assert (not bad) == (a.B > a.A / t2 and lhs)


def test_weights_decay():
    prob = ew.build_problem(P0, A0)
    U, V = ew.weights_UV(prob.bg)
    assert U[0] < 1e-30 and U[-1] < 1e-30 and V[0] < 1e-10 and V[-1] < 1e-10


def test_beta_window():
    with pytest.raises(ValueError, match="weight exponent"):
        ew.build_problem(P0, A0, beta=2.5)


def test_reduced_functional_requires_mean_zero():
    prob = ew.build_problem(P0, A0)
    with pytest.raises(ValueError, match="mean-zero"):
        ew.reduced_functional(np.ones(prob.n), np.zeros(prob.n), prob)


def test_gradient_fd_at_zero():
    prob = ew.build_problem(P0, A0)
    n, m = prob.n, prob.measure
    w2 = np.concatenate([prob.w, prob.w])

    def proj(d):
        return np.concatenate([project_mean_zero(d[:n], m), project_mean_zero(d[n:], m)])

    rep = gradient_fd_harness(lambda z: ew.reduced_functional(z[:n], z[n:], prob),
                              lambda z: np.concatenate(ew._raw_gradient(prob, z[:n], z[n:])),
                              np.zeros(2 * n), project=proj,
                              norm=lambda d: math.sqrt(float(np.dot(w2, d * d))))
    assert rep.worst < 1e-6


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1))
def test_gradient_fd_consistent_everywhere(seed):
    prob = ew.build_problem(P0, A0, ew.default_grid(P0, A0, 1501))
    n, m = prob.n, prob.measure
    w2 = np.concatenate([prob.w, prob.w])

    def proj(d):
        return np.concatenate([project_mean_zero(d[:n], m), project_mean_zero(d[n:], m)])

    rng = np.random.default_rng(seed)
    z0 = proj(np.concatenate([rng.normal() * np.sin(prob.grid.x / 3), rng.normal() * np.tanh(prob.grid.x)]))
    rep = gradient_fd_harness(lambda z: ew.reduced_functional(z[:n], z[n:], prob),
                              lambda z: np.concatenate(ew._raw_gradient(prob, z[:n], z[n:])),
                              z0, seed=seed % 1000, project=proj,
                              norm=lambda d: math.sqrt(float(np.dot(w2, d * d))))
    assert rep.consistent()


def test_minimizer_satisfies_constraints_and_theorem(base):
    assert base.converged
    assert max(base.constraint_residuals) < 1e-10
    rep = ew.theorem_th2_report(base)
    assert rep.passed, ([(t.label, t.measured, t.expected) for t in rep.tails], rep.flagged)
    w2, phi2 = ew.theorem_integrals(P0, A0)
    assert (w2, phi2) == pytest.approx((0.25, 3.0))
    assert max(rep.integral_rel_errors()) < 1e-3


def test_multipliers_recovered(base):
    m = ew.recover_multipliers(base)
    assert m.xi1 == pytest.approx(-1.0, abs=1e-6)
    assert m.xi2 == pytest.approx(4.0, abs=1e-6)
    assert m.residual < 1e-6
    assert ew_kkt_residual(base) < 1e-6


def test_restarts_agree():
    res = ew.minimize_constrained(P0, A0, restarts=5, seed=11)
    assert all(r.converged for r in res.restarts)
    assert res.restart_spread < 1e-5


def test_lattice_is_admissible():
    lat = ew.admissible_lattice()
    assert len(lat) == 6
    assert all(not a.violations(p) for p, a in lat)


def test_fields_from_reconstruction(base):
    f = ew.reconstruct_fields(base)
    assert np.all(f["w"] > 0) and np.all(f["phi"] > 0)
    # phi -> 0 at both ends: the Higgs field is expelled far from the wall
    assert f["phi"][0] < 1e-10 and f["phi"][-1] < 1e-10


@pytest.mark.parametrize("beta,blend", [(None, "quartic"), (0.5, "quadratic"), (1.5, "quartic")])
def test_solution_independent_of_weight_choice(base, beta, blend):
    other = ew.minimize_constrained(P0, A0, beta=beta, blend=blend)
    assert np.max(np.abs(other.eta1 - base.eta1)) < 1e-6
    assert np.max(np.abs(other.eta2 - base.eta2)) < 1e-6
