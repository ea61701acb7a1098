"""Shared fixtures: models and the expensive wave and PDE runs, built once per session."""
from __future__ import annotations

import numpy as np
import pytest

from spreadwave import models as Mo
from spreadwave import pde
from spreadwave import wave as W
from spreadwave.speed import minimize_phi

UNGULATE = dict(d1=1.0, d2=0.5, alpha=1.0, delta=1.0, r1=2.0, r2=1.0)

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def fisher_model():
    return Mo.fisher()


@pytest.fixture(scope="session")
def ungulate_params():
    return Mo.UngulateParams(**UNGULATE)


@pytest.fixture(scope="session")
def ungulate_model(ungulate_params):
    return Mo.ungulate(ungulate_params)


@pytest.fixture(scope="session")
def fisher_params(fisher_model):
    return W.build_params(fisher_model, 2.5)


@pytest.fixture(scope="session")
def ungulate_wave_params(ungulate_model):
    return W.build_params(ungulate_model, 2.5)


@pytest.fixture(scope="session")
def fisher_wave(fisher_model, fisher_params):
    return W.cooperative_wave(fisher_model, 2.5, params=fisher_params)


@pytest.fixture(scope="session")
def fisher_wave_refined(fisher_model, fisher_params):
    return W.cooperative_wave(fisher_model, 2.5, params=fisher_params, refine=1)


@pytest.fixture(scope="session")
def ungulate_lower_wave(ungulate_model, ungulate_wave_params):
    return W.cooperative_wave(ungulate_model, 2.5, "f-", params=ungulate_wave_params)


@pytest.fixture(scope="session")
def ungulate_sandwich_wave(ungulate_model, ungulate_wave_params, ungulate_lower_wave):
    return W.sandwich_wave(ungulate_model, 2.5, params=ungulate_wave_params, lower=ungulate_lower_wave)


@pytest.fixture(scope="session")
def fisher_sim(fisher_model):
    return pde.run(pde.SimConfig(X=200.0), fisher_model)


@pytest.fixture(scope="session")
def ungulate_sim_config():
    return pde.SimConfig(X=250.0)


@pytest.fixture(scope="session")
def ungulate_sandwich_sim(ungulate_model, ungulate_sim_config):
    return pde.sandwich_check(ungulate_sim_config, ungulate_model)


@pytest.fixture(scope="session")
def ungulate_c_star(ungulate_model):
    return minimize_phi(ungulate_model)[0]


@pytest.fixture(scope="session")
def acceptance():
    """Record ``(criterion, passed, detail)``; also printed immediately."""

    def record(n: int, passed: bool, detail: str = "") -> None:
        ACCEPTANCE[n] = (bool(passed), detail)
        print(f"criterion {n}: {'PASS' if passed else 'FAIL'} {detail}")

    return record


def sample_ungulate_params(rng, n: int):
    """``n`` random parameter sets with d1 >= d2, alpha < r1, delta above its threshold and k1 > h_m = 1."""
    out = []
    while len(out) < n:
        r1 = rng.uniform(1.0, 3.0)
        alpha = rng.uniform(0.1, 0.9) * r1
        r2 = rng.uniform(0.5, 2.0)
        thr = r1 * r2 / (r1 + r2 - alpha)
        top = 0.95 * (r1 - alpha + r1 / np.e)  # keeps g(1) < 0, i.e. k1 > 1
        if top <= thr:
            continue
        d1 = rng.uniform(0.5, 2.0)
        out.append(Mo.UngulateParams(d1=d1, d2=rng.uniform(0.2, 1.0) * d1, alpha=alpha,
                                     delta=rng.uniform(thr, top), r1=r1, r2=r2))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
