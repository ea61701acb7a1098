import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spreadwave import models as Mo
from spreadwave.errors import ConfigurationError, OutOfRangeError
from spreadwave.spectral import M_vector, phi
from spreadwave.speed import (
    check_H3, choose_gamma, gamma_candidates, h3_witness_component, left_root, minimize_phi,
    speed_report,
)


def test_minimize_phi_fisher(fisher_model):
    c, lam = minimize_phi(fisher_model)
    assert c == pytest.approx(2.0, abs=1e-12)
    assert lam == pytest.approx(1.0, abs=1e-8)


def test_minimize_phi_ungulate(ungulate_model):
    c, lam = minimize_phi(ungulate_model)
    assert c == pytest.approx(2.0, abs=1e-12)
    assert lam == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("d1,d2,r1,alpha", [(1.0, 0.5, 2.0, 1.0), (2.0, 0.3, 3.0, 0.5), (0.7, 0.7, 1.5, 0.2)])
def test_minimize_phi_matches_grid_scan(d1, d2, r1, alpha):
    model = Mo.ungulate(Mo.UngulateParams(d1=d1, d2=d2, alpha=alpha, delta=0.8, r1=r1, r2=1.0))
    grid = np.geomspace(1e-3, 1e3, 2000)
    vals = np.array([phi(model, x).phi for x in grid])
    # the coarse scan alone is only good to ~6e-6; zoom once around its best point
    i = int(np.argmin(vals))
    grid = np.geomspace(grid[i - 1], grid[i + 1], 2000)
    vals = np.array([phi(model, x).phi for x in grid])
    c, _ = minimize_phi(model)
    assert c == pytest.approx(float(vals.min()), rel=1e-6)
    assert c <= vals.min() * (1 + 1e-12)


def test_left_root_ungulate_closed_form(ungulate_model):
    assert left_root(ungulate_model, 2.5) == pytest.approx(0.5, abs=1e-12)


def test_left_root_fisher_sign_change_scan(fisher_model):
    grid = np.linspace(1e-3, 1.0, 100_000)
    g = np.array([phi(fisher_model, x).phi for x in grid[::100]]) - 2.5
    i = int(np.nonzero(np.diff(np.sign(g)))[0][0])
    lo, hi = grid[::100][i], grid[::100][i + 1]
    root = left_root(fisher_model, 2.5)
    assert lo <= root <= hi
    assert root == pytest.approx(0.5, abs=1e-12)


def test_left_root_approaches_lambda_star(fisher_model):
    root = left_root(fisher_model, 2.0 * (1 + 1e-8))
    assert abs(root - 1.0) < 1e-3


@pytest.mark.parametrize("c", [1.0, 2.0, 2.0 * (1 + 1e-13)])
def test_left_root_rejects_slow_speeds(fisher_model, c):
    with pytest.raises(OutOfRangeError) as info:
        left_root(fisher_model, c)
    assert info.value.c_star == pytest.approx(2.0)
    assert "c* = 2" in str(info.value)


def test_choose_gamma_fisher_beta_6(fisher_model):
    g, sp = choose_gamma(fisher_model, 2.5, 6.0)
    assert g == 1.99
    assert sp.lam == pytest.approx(0.995, abs=1e-12)
    # M = beta + Phi lam - d lam^2 = beta + 1 for Fisher
    assert M_vector(fisher_model, sp.lam, 6.0, sp)[0] == pytest.approx(7.0, abs=1e-13)


def test_choose_gamma_ungulate_reverified(ungulate_model, ungulate_wave_params):
    p = ungulate_wave_params
    gL = p.gamma * p.Lambda_c
    assert 1 < p.gamma < 2
    assert phi(ungulate_model, gL).phi < 2.5
    assert np.all(M_vector(ungulate_model, gL, p.beta) > 0)


def test_choose_gamma_fails_for_tiny_beta():
    # M_2 = (beta - d2 lam^2 + Phi lam) nu_2 turns negative when beta is far too small
    model = Mo.ungulate(Mo.UngulateParams(d1=1.0, d2=0.5, alpha=1.0, delta=1.0, r1=2.0, r2=1.0))
    with pytest.raises(ConfigurationError, match="increase beta"):
        choose_gamma(model, 10.0, -50.0)


def test_gamma_candidates_grid():
    g = gamma_candidates()
    assert g[0] == 1.99 and g[-1] == 1.01 and len(g) == 99


def test_H3_passes_for_delta_one(ungulate_model):
    results = check_H3(ungulate_model)
    assert [r.name for r in results] == ["H3.f-", "H3.f+"]
    assert all(r.passed for r in results)


def test_H3_fails_below_threshold_and_names_component_1(ungulate_params):
    p = Mo.UngulateParams(d1=1.0, d2=0.5, alpha=1.0, delta=0.5 * ungulate_params.delta_threshold,
                          r1=2.0, r2=1.0)
    # the weak damping pushes k1 far out; the model is still constructible
    model = Mo.ungulate(p)
    results = check_H3(model)
    assert not all(r.passed for r in results)
    assert set(h3_witness_component(results)) == {1}


def test_H3_trivial_for_tiny_alpha(ungulate_model):
    results = check_H3(ungulate_model, alpha_samples=[1e-9], lambda_samples=[0.5, 1.0, 2.0])
    assert all(r.passed for r in results)


def test_speed_report_blocks(ungulate_model):
    rep = speed_report(ungulate_model, [2.5, 3.0], with_q=False)
    assert rep.c_star == pytest.approx(2.0)
    for c in (2.5, 3.0):
        b = rep.block(c)
        assert phi(ungulate_model, b.Lambda_c).phi == pytest.approx(c, rel=1e-10)
        assert b.Lambda_c < rep.lambda_star
        assert 1 < b.gamma < 2
        assert phi(ungulate_model, b.gamma * b.Lambda_c).phi < c


def test_phi_unimodal_on_grid(ungulate_model):
    grid = np.geomspace(0.01, 100, 400)
    vals = np.array([phi(ungulate_model, x).phi for x in grid])
    s = np.sign(np.diff(vals))
    assert np.count_nonzero(np.diff(s[s != 0])) <= 1


@settings(max_examples=15, deadline=None)
@given(st.floats(1.05, 4.0), st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_left_root_properties(ratio, d, r):
    model = Mo.fisher(d=d, r=r)
    c_star, lam_star = minimize_phi(model)
    c = ratio * c_star
    Lc = left_root(model, c, c_star, lam_star)
    assert Lc < lam_star
    assert abs(phi(model, Lc).phi - c) < 1e-10 * c
    lams = np.linspace(Lc, lam_star * (1 - 1e-6), 50)
    vals = np.array([phi(model, x).phi for x in lams])
    assert np.all(np.diff(vals) < 0)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_fisher_scaling_of_c_star(d, r):
    c1, _ = minimize_phi(Mo.fisher(d=d, r=r))
    c4, _ = minimize_phi(Mo.fisher(d=4 * d, r=r))
    assert c1 == pytest.approx(2 * math.sqrt(d * r), rel=1e-10)
    assert c4 == pytest.approx(2 * c1, rel=1e-10)
