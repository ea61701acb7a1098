import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import sample_ungulate_params
from spreadwave import models as Mo
from spreadwave.errors import HypothesisViolation, InvalidInputError
from spreadwave.spectral import phi

# equilibria of the example parameters, from 40-digit root finding
K = (1.636999031314714747, 0.3184995156573573736)
K_PLUS = (1.735758882342884643, 0.3678794411714423216)
K_MINUS = (1.611911883618932658, 0.3059559418094663288)
H_0 = 0.5089928409509646351


def test_fisher_basics(fisher_model):
    assert fisher_model.f(np.array([0.5]))[0] == 0.25
    assert fisher_model.J0[0, 0] == 1.0
    assert fisher_model.cooperative
    assert fisher_model.reaction("f-") is fisher_model.f


def test_modelspec_is_immutable(ungulate_model):
    with pytest.raises(ValueError):
        ungulate_model.k[0] = 0.0
    with pytest.raises(AttributeError):
        ungulate_model.name = "x"


def test_ungulate_equilibria_frozen(ungulate_model, ungulate_params):
    np.testing.assert_allclose(ungulate_model.k, K, rtol=0, atol=1e-12)
    np.testing.assert_allclose(ungulate_model.k_plus, K_PLUS, rtol=0, atol=1e-12)
    np.testing.assert_allclose(ungulate_model.k_minus, K_MINUS, rtol=0, atol=1e-12)
    assert ungulate_model.params["h_0"] == pytest.approx(H_0, abs=1e-12)
    np.testing.assert_allclose(Mo.solve_equilibrium(ungulate_params, "h"), K, atol=1e-12)


def test_ungulate_equilibrium_residual(ungulate_params):
    k1, k2 = Mo.solve_equilibrium(ungulate_params, "h")
    p = ungulate_params
    assert abs(p.delta * k1 - (p.r1 - p.alpha) - p.r1 * Mo.ricker(k1)) < 1e-12
    assert k2 == Mo.ricker(k1)


def test_zero_variant_equilibrium(ungulate_params, ungulate_model):
    k = Mo.solve_equilibrium(ungulate_params, "0")
    np.testing.assert_array_equal(k, [1.0, 0.0])
    np.testing.assert_allclose(ungulate_model.reaction("h0")(k[:, None])[:, 0], 0.0, atol=1e-15)


def test_ungulate_J0(ungulate_model):
    np.testing.assert_array_equal(ungulate_model.J0, [[1.0, 0.0], [1.0, -1.0]])


def test_equilibrium_ordering_and_k2_chain(ungulate_model):
    m = ungulate_model
    h = Mo.ricker
    assert np.all(m.k_minus > 0)
    assert np.all(m.k_minus <= m.k) and np.all(m.k <= m.k_plus)
    assert m.k_minus[1] <= h(m.k_plus[0]) + 1e-15 <= m.k[1] + 2e-15


def test_h_pm_properties(ungulate_params):
    h_plus, h_minus, h0 = Mo.build_h_pm(ungulate_params)
    assert h_plus(5.0) == pytest.approx(np.exp(-1.0), abs=1e-15)
    k1p = Mo.solve_equilibrium(ungulate_params, "h+")[0]
    w = np.linspace(1e-6, k1p, 4000)
    h = Mo.ricker(w)
    assert np.all(h_minus(w) > 0)
    assert np.all(h_minus(w) <= h) and np.all(h <= h_plus(w))
    assert np.all(h_plus(w) <= w)  # h'(0) w with h'(0) = 1
    near = w[w <= h0]
    np.testing.assert_array_equal(h_minus(near), Mo.ricker(near))
    np.testing.assert_array_equal(h_plus(near), Mo.ricker(near))
    assert abs(Mo.ricker(h0) - Mo.ricker(k1p)) < 1e-12


def test_H1_passes(ungulate_model, fisher_model):
    for model in (ungulate_model, fisher_model):
        results = Mo.check_H1(model)
        assert all(r.passed for r in results), [r.line() for r in results if not r.passed]


def test_H4_ricker_passes(ungulate_params):
    results = Mo.check_H4(Mo.ricker, Mo.default_h_grid(ungulate_params), 1.0)
    assert all(r.passed for r in results), [r.line() for r in results if not r.passed]
    assert Mo.default_h_grid(ungulate_params).size == 10_000


def test_H4_value_at_one():
    h = Mo.ricker(1.0)
    assert h * h + 4 * h - 4 == pytest.approx(-2.393146952077618, abs=1e-14)


def test_H4_linear_h_flagged():
    results = {r.name: r for r in Mo.check_H4(lambda w: np.asarray(w, dtype=float), np.linspace(0, 50, 10_000))}
    assert not results["H4.ratio_decreasing"].passed
    assert not results["H4.unimodal"].passed


def test_5_36_threshold_arithmetic(ungulate_params):
    assert ungulate_params.delta_threshold == pytest.approx(1.0, abs=1e-15)
    results = Mo.check_5_36(ungulate_params)
    assert all(r.passed for r in results)


def test_5_36_fails_below_threshold():
    p = Mo.UngulateParams(d1=1.0, d2=0.5, alpha=1.0, delta=0.99, r1=2.0, r2=1.0)
    results = {r.name: r for r in Mo.check_5_36(p)}
    assert not results["5.36.threshold"].passed
    assert not results["5.36.ray_inequality_1"].passed


def test_5_36_equal_diffusion_sigma_constant():
    p = Mo.UngulateParams(d1=1.0, d2=1.0, alpha=1.0, delta=1.0, r1=2.0, r2=1.0)
    full = Mo.check_5_36(p)
    single = Mo.check_5_36(p, lambdas=[1.0])
    assert [r.margin for r in full] == [r.margin for r in single]


def test_invalid_params_rejected():
    with pytest.raises(InvalidInputError, match="alpha"):
        Mo.UngulateParams(d1=1.0, d2=0.5, alpha=2.0, delta=1.0, r1=2.0, r2=1.0)
    with pytest.raises(InvalidInputError, match="r2"):
        Mo.UngulateParams(d1=1.0, d2=0.5, alpha=1.0, delta=1.0, r1=2.0, r2=0.0)
    with pytest.raises(InvalidInputError):
        Mo.fisher(d=-1.0)


def test_k1_below_h_m_rejected():
    with pytest.raises(HypothesisViolation, match="h_m"):
        Mo.ungulate(Mo.UngulateParams(d1=1.0, d2=0.5, alpha=1.0, delta=5.0, r1=2.0, r2=1.0))


def test_unknown_reaction(ungulate_model):
    with pytest.raises(InvalidInputError):
        ungulate_model.reaction("g")
    with pytest.raises(InvalidInputError):
        ungulate_model.equilibrium("h0")


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_psi_and_ratio_closed_form(seed):
    p = sample_ungulate_params(np.random.default_rng(seed), 1)[0]
    model = Mo.ungulate(p)
    for lam in np.geomspace(0.05, 20.0, 12):
        sp = phi(model, lam)
        assert sp.psi == pytest.approx(p.d1 * lam**2 + p.r1 - p.alpha, rel=1e-10)
        ratio = p.r2 * p.hp0 / ((p.d1 - p.d2) * lam**2 + p.r1 + p.r2 - p.alpha)
        assert sp.nu[1] / sp.nu[0] == pytest.approx(ratio, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_models_satisfy_H1(seed):
    model = Mo.ungulate(sample_ungulate_params(np.random.default_rng(seed), 1)[0])
    assert all(r.passed for r in Mo.check_H1(model, n=12))


def test_fd_jacobian_and_box_samples(fisher_model):
    pts = Mo.box_samples([1.0], 5)
    assert pts.shape == (1, 7)
    jac = Mo.fd_jacobian(fisher_model.f, pts)
    np.testing.assert_allclose(jac[0, 0], 1 - 2 * pts[0], atol=1e-9)
    assert Mo.box_samples([1.0, 1.0, 1.0], 4).shape == (3, 16 + 8)
