import importlib
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from langevin_ldp import _pykernels, kernels
from langevin_ldp.errors import (ConfigurationError, DivergenceError, DomainError,
                                 InsufficientResolutionError, StabilityError)
from langevin_ldp.montecarlo import (ContinuousGaussian, EmpiricalSummary, SimulationConfig,
                                     decay_rate_estimate, default_burn_in,
                                     exact_stationary_sample, run_chains, simulate_chain,
                                     stationary_draws, wilson_interval)
from langevin_ldp.schemes import euler_maruyama, theta_method
from langevin_ldp.sets import Annulus, BallComplement, Box, encode_sets
from langevin_ldp.stationary import closed_form_sigma

EM3 = euler_maruyama(3.0)


def _cfg(**kw):
    base = dict(scheme=EM3, eps=1.0, h=0.01, n_steps=50_000, seed=7,
                target_sets=(BallComplement(0.5), Box(0, 1, -1, 1), Annulus(0.2, 0.6)))
    base.update(kw)
    return SimulationConfig(**base)


def test_default_burn_in():
    assert default_burn_in(3.0, 1e-3) == 20_000
    assert default_burn_in(0.5, 0.1) == 400
    assert _cfg().burn_in == 2000


def test_config_validation():
    with pytest.raises(ConfigurationError):
        _cfg(burn_in=50_000)
    with pytest.raises(ConfigurationError):
        _cfg(n_chains=0)
    with pytest.raises(StabilityError):
        _cfg(h=1.0)


def test_noiseless_contracts():
    s = simulate_chain(_cfg(eps=0.0, init=(1.0, 1.0), n_steps=60_000, burn_in=50_000))
    np.testing.assert_allclose(s.covariance, 0.0, atol=1e-15)
    np.testing.assert_allclose(s.extras["final_state"], 0.0, atol=1e-15)


def test_repeatable():
    a = simulate_chain(_cfg(), 3)
    b = simulate_chain(_cfg(), 3)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.m2, b.m2)
    assert a.hits == b.hits
    c = simulate_chain(_cfg(), 4)
    assert not np.array_equal(a.m2, c.m2)


def test_threads_do_not_change_result():
    cfg = _cfg(n_chains=4)
    one, _ = run_chains(cfg, threads=1)
    many, _ = run_chains(cfg, threads=4)
    np.testing.assert_array_equal(one.mean, many.mean)
    np.testing.assert_array_equal(one.m2, many.m2)
    assert one.hits == many.hits


def test_backends_bit_identical():
    if kernels.BACKEND != "cython":
        pytest.skip("compiled kernel not built")
    coef = np.array([0.97, -0.01, 0.01, 1.0, 0.1, 0.0])
    z = np.random.default_rng(0).standard_normal(20_000)
    sets = np.ascontiguousarray(encode_sets([BallComplement(0.3), Box(-1, 0, 0, 1),
                                             Annulus(0.1, 0.2)]))
    out = []
    for mod in (kernels, _pykernels):
        state, stats = np.array([0.5, -0.5]), np.zeros(6)
        hits = np.zeros(3, dtype=np.int64)
        bad = mod.run_block(coef, state, z, 0, 100, stats, sets, hits)
        out.append((bad, state.copy(), stats.copy(), hits.copy()))
    assert out[0][0] == out[1][0] == -1
    for a, b in zip(out[0][1:], out[1][1:]):
        np.testing.assert_array_equal(a, b)


def test_pure_fallback_selected_by_env():
    code = "from langevin_ldp import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, LANGEVIN_LDP_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


def test_divergence_reports_step():
    cfg = SimulationConfig(EM3, 1.0, 1.0, 10_000, burn_in=0, check_stability=False)
    with pytest.raises(DivergenceError) as info:
        simulate_chain(cfg)
    assert 0 < info.value.step < 10_000
    assert str(info.value.step) in str(info.value)


def test_merge_matches_pooled():
    x = np.random.default_rng(1).standard_normal((1000, 2))

    def summ(v):
        d = v - v.mean(0)
        return EmpiricalSummary(len(v), v.mean(0), np.array([d[:, 0] @ d[:, 0],
                                d[:, 0] @ d[:, 1], d[:, 1] @ d[:, 1]]))

    merged = summ(x[:300]).merge(summ(x[300:]))
    np.testing.assert_allclose(merged.mean, x.mean(0), rtol=1e-13)
    np.testing.assert_allclose(merged.covariance, np.cov(x.T), rtol=1e-12)


def test_hits_bounded_and_summary_psd():
    s, _ = run_chains(_cfg(n_chains=2))
    for h in s.set_hits:
        assert 0 <= h.hits <= s.n_samples
        lo, hi = h.ci
        assert lo <= h.p_hat <= hi
    assert np.linalg.eigvalsh(s.covariance).min() >= 0


def test_initial_conditions_forgotten():
    a = simulate_chain(_cfg(n_steps=400_000, init=(0.0, 0.0)))
    b = simulate_chain(_cfg(n_steps=400_000, init=(5.0, -5.0), seed=8))
    sigma = closed_form_sigma(EM3, 1.0, 0.01).sigma
    for s in (a, b):
        assert np.linalg.norm(s.covariance - sigma) / np.linalg.norm(sigma) < 0.15


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0.03 < hi < 0.04
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    assert hi - 0.5 == pytest.approx(0.5 - lo)


def test_exact_sample_identity():
    s = exact_stationary_sample(np.eye(2), 1_000_000, seed=0)
    np.testing.assert_allclose(s.covariance, np.eye(2), atol=0.01)


def test_exact_sample_tail():
    scale, r = 0.5, 1.0
    s = exact_stationary_sample(scale * np.eye(2), 1_000_000, seed=1, sets=[BallComplement(r)])
    expect = math.exp(-r * r / (2 * scale))
    lo, hi = s.set_hits[0].ci
    assert lo <= expect <= hi


def test_exact_sample_singular():
    v = np.array([1.0, 2.0]) / math.sqrt(5)
    x = stationary_draws(np.outer(v, v), 1000, seed=0)
    resid = x - np.outer(x @ v, v)
    assert np.abs(resid).max() <= 1e-12


def test_exact_sample_rejects_indefinite():
    with pytest.raises(DomainError):
        exact_stationary_sample(np.diag([1.0, -1.0]), 10)


def test_decay_continuous():
    est = decay_rate_estimate(ContinuousGaussian(3.0), np.geomspace(0.05, 0.5, 8),
                              BallComplement(1.0), n_samples=1_000_000)
    assert est.target == -3.0
    assert est.rel_error < 0.1
    assert est.skipped  # smallest eps values see no hits
    assert len(est.rows()) == 8


def test_decay_origin_in_set():
    est = decay_rate_estimate(ContinuousGaussian(3.0), np.geomspace(0.05, 0.5, 6),
                              Box(-1, 1, -1, 1), n_samples=100_000)
    assert est.target == 0.0
    assert abs(est.slope) < 0.05


def test_decay_no_hits():
    with pytest.raises(InsufficientResolutionError):
        decay_rate_estimate(ContinuousGaussian(3.0), [0.01, 0.02], BallComplement(5.0),
                            n_samples=10_000)


def test_decay_trajectory_mode():
    tmpl = SimulationConfig(EM3, 1.0, 0.01, 200_000, seed=3)
    est = decay_rate_estimate(EM3, [0.3, 0.5, 1.0], BallComplement(0.6), h=0.01,
                              mode="trajectory", config=tmpl)
    assert est.rel_error < 0.25


def test_decay_nu_axis():
    est = decay_rate_estimate(theta_method(0.5, 3.0), np.linspace(3.0, 12.0, 6),
                              BallComplement(1.0), axis="nu", eps=1.0, h=0.1,
                              n_samples=1_000_000)
    assert est.target == pytest.approx(-1.0)
    assert est.slope < 0
