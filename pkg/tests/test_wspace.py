import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from domainwall.core import Grid, quad_weights
from domainwall.wspace import (BLENDS, background, build_backgrounds, build_measure, dirichlet_sq,
                               h_norm_sq, poincare_ratio, project_mean_zero, split,
                               trudinger_moser_check)

GRID = Grid.symmetric(12.0, 2401)


@given(beta=st.floats(0.1, 3), blend=st.sampled_from(sorted(BLENDS)))
def test_measure_shape(beta, blend):
    m = build_measure(GRID, beta, blend)
    x = GRID.x
    out = np.abs(x) >= 1
    assert np.allclose(m.h0[out], np.exp(-beta * np.abs(x[out])))
    assert np.all(m.h0 > 0) and np.allclose(m.h0, m.h0[::-1])
    # continuous at |x| = 1
    i = np.argmin(np.abs(x - 1))
    assert abs(m.h0[i + 1] - m.h0[i - 1]) < 5 * beta * GRID.h


def test_measure_validation():
    with pytest.raises(ValueError):
        build_measure(GRID, 0.0)
    with pytest.raises(ValueError):
        build_measure(GRID, 1.0, "cubic")


@given(c=st.floats(-50, 50), seed=st.integers(0, 10**6))
def test_split_properties(c, seed):
    m = build_measure(GRID, 1.0)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(GRID.n)
    s = split(v + c, m)
    assert abs(m.mean(s.dotted)) < 1e-12 * (1 + abs(c))
    assert np.allclose(s.mean + s.dotted, v + c, atol=1e-12 * (1 + abs(c)))
    # projection is idempotent and kills constants
    p = project_mean_zero(s.dotted, m)
    assert np.allclose(p, s.dotted, atol=1e-12)
    assert np.allclose(project_mean_zero(np.full(GRID.n, c), m), 0, atol=1e-12 * (1 + abs(c)))


def test_split_rejects_nonfinite():
    v = np.zeros(GRID.n)
    v[0] = np.nan
    with pytest.raises(ValueError):
        split(v, build_measure(GRID, 1.0))


@given(k=st.integers(1, 8), phase=st.floats(0, 6.3))
def test_poincare_ratio_bounded(k, phase):
    # the weighted Poincare constant is finite: bounded over oscillatory and slowly varying modes
    m = build_measure(GRID, 1.0)
    v = project_mean_zero(np.cos(k * GRID.x / 3 + phase) + np.tanh(GRID.x), m)
    assert 0 < poincare_ratio(v, m) < 20


def test_poincare_ratio_validation():
    m = build_measure(GRID, 1.0)
    with pytest.raises(ValueError):
        poincare_ratio(np.sin(GRID.x) + 1, m)
    with pytest.raises(ValueError):
        poincare_ratio(np.zeros(GRID.n), m)


def test_norms():
    m = build_measure(GRID, 1.0)
    v = GRID.x.copy()
    assert dirichlet_sq(v, GRID) == pytest.approx(24.0)
    assert h_norm_sq(v, m) == pytest.approx(24.0 + m.l2_sq(v))


@given(amp=st.floats(0.1, 3), a=st.floats(0.5, 3))
def test_trudinger_moser_ratio_stays_bounded(amp, a):
    m = build_measure(GRID, 1.0)
    v = project_mean_zero(amp * np.tanh(GRID.x), m)
    tm = trudinger_moser_check(v, a, 0.5, m)
    assert 0 < tm.ratio < 50
    with pytest.raises(ValueError):
        trudinger_moser_check(v, a, 1.5, m)


@given(alpha=st.floats(-3, 3), beta=st.floats(-3, 3))
def test_background_is_c2_and_linear_outside(alpha, beta):
    x = np.array([-1 - 1e-12, -1 + 1e-12, 1 - 1e-12, 1 + 1e-12, -4.0, 5.0])
    u, du, d2 = background(x, alpha, beta)
    tol = 1e-9 * (1 + abs(alpha) + abs(beta))
    assert u[0] == pytest.approx(u[1], abs=tol) and u[2] == pytest.approx(u[3], abs=tol)
    assert du[0] == pytest.approx(du[1], abs=tol) and du[2] == pytest.approx(du[3], abs=tol)
    assert abs(d2[1]) < tol and abs(d2[2]) < tol
    assert u[4] == pytest.approx(4 * beta) and u[5] == pytest.approx(5 * alpha)
    assert du[4] == -beta and du[5] == alpha


@given(a1=st.floats(-3, 3), b1=st.floats(-3, 3), a2=st.floats(-3, 3), b2=st.floats(-3, 3))
def test_discrete_source_total(a1, b1, a2, b2):
    bg = build_backgrounds(GRID, a1, a2, b1, b2, 1.0)
    w = quad_weights(GRID)
    assert np.dot(w, bg.src1) == pytest.approx(a1 + b1, abs=1e-9)
    assert np.dot(w, bg.src2) == pytest.approx(a2 + b2, abs=1e-9)
    assert bg.src1[0] == 0 and bg.src1[-1] == 0
    assert np.allclose(bg.omega, GRID.x**2)


def test_backgrounds_need_room():
    with pytest.raises(ValueError):
        build_backgrounds(Grid.symmetric(1.0, 101), 1, 1, 1, 1, 1.0)
    with pytest.raises(ValueError):
        build_backgrounds(Grid.symmetric(10.0, 41), 1, 1, 1, 1, 1.0)
