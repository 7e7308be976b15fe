"""Acceptance criteria, each run at its stated tolerance and runtime budget.

Every criterion prints one ``PASS``/``FAIL`` line.  The lines are also
collected in ``RESULTS`` and repeated in the pytest terminal summary (see
``conftest.py``).  Run this file directly for the lines alone.
"""

import itertools
import time

import numpy as np

from langevin_ldp.gibbs import laplace_limit_curve, scaling_identity_check
from langevin_ldp.ldp import (dissipation_limit_curve, legendre_quadratic, lmgf_small_noise,
                              preservation_small_noise, preservation_strong_dissipation,
                              rate_small_noise)
from langevin_ldp.montecarlo import (ContinuousGaussian, SimulationConfig, decay_rate_estimate,
                                     default_burn_in, run_chains)
from langevin_ldp.potentials import builtin_potential
from langevin_ldp.schemes import euler_maruyama, find_instability_witness, stability, theta_method
from langevin_ldp.sets import BallComplement
from langevin_ldp.stationary import closed_form_sigma, lyapunov_sigma, sigma_asymptotics

RESULTS = []

THETAS = (0.5, 0.6, 0.75, 0.9, 1.0)
NUS = (0.5, 1.0, 3.0, 5.0, 10.0, 100.0)
HS = tuple(np.geomspace(1e-4, 1e-1, 7))
EPSS = (0.1, 1.0)
ORACLE_GRID = list(itertools.product(THETAS, NUS, HS, EPSS))


def _record(number, title, budget, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    in_time = elapsed < budget
    passed = bool(ok) and in_time
    line = (f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} | {detail} | "
            f"{elapsed:.2f}s (limit {budget:g}s)")
    RESULTS.append(line)
    print(line)
    return passed, line


def _oracle_equivalence():
    worst = 0.0
    for th, nu, h, eps in ORACLE_GRID:
        s = theta_method(th, nu)
        a = closed_form_sigma(s, eps, h).sigma
        b = lyapunov_sigma(s, eps, h).sigma
        worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(b))
    return worst <= 1e-10, f"max rel Frobenius error {worst:.2e} over {len(ORACLE_GRID)} tuples (tol 1e-10)"


def test_criterion_1_oracle_equivalence():
    ok, line = _record(1, "closed form vs Lyapunov", 5.0, _oracle_equivalence)
    assert ok, line


SMALL_NOISE_POINTS = ((1.0, 0.0), (0.0, 0.5), (1.0, 1.0), (-1.2, 0.9))


def _small_noise():
    h = np.geomspace(1e-1, 1e-4, 10)
    worst, verdicts = 0.0, []
    for nu in (1.0, 3.0, 10.0):
        for s in (euler_maruyama(nu), theta_method(0.5, nu), theta_method(1.0, nu)):
            rep = preservation_small_noise(s, SMALL_NOISE_POINTS, h, tol=1e-3)
            verdicts.append(rep.verdict)
            for l, t in zip(rep.limits, rep.targets):
                worst = max(worst, abs(l - t) / abs(t))
    return all(verdicts) and worst <= 1e-3, f"max rel error of limit {worst:.2e} (tol 1e-3)"


def test_criterion_2_small_noise_preservation():
    ok, line = _record(2, "small-noise preservation", 5.0, _small_noise)
    assert ok, line


def _dissipation():
    grid = np.geomspace(1e1, 1e6, 12)
    worst = 0.0
    verdict_ok = True
    for h, eps, th in itertools.product((0.05, 0.1, 0.5), (0.5, 1.0), (0.5, 0.75, 1.0)):
        for y in ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0)):
            c = dissipation_limit_curve(th, eps, h, grid, y)
            if th == 0.5:
                target = eps / 4 * (y[0] ** 2 + y[1] ** 2)
            else:
                target = eps / 4 * y[1] ** 2
            worst = max(worst, abs(c.limit - target) / eps)
        rep = preservation_strong_dissipation(th, eps, h, nu_grid=grid)
        verdict_ok &= rep.verdict == (th == 0.5)
    return (worst <= 1e-3 and verdict_ok,
            f"max |limit - target|/eps {worst:.2e} (tol 1e-3); verdicts true iff theta=1/2: {verdict_ok}")


def test_criterion_3_strong_dissipation_dichotomy():
    ok, line = _record(3, "strong-dissipation dichotomy", 10.0, _dissipation)
    assert ok, line


def _asymptotics():
    h = np.geomspace(1e-2, 1e-4, 9)
    worst_diag, worst_off = 0.0, 0.0
    for nu in (3.0, 5.0, 10.0):
        target = (nu * nu - 4) / (2 * nu)
        for s in (euler_maruyama(nu), theta_method(0.5, nu), theta_method(1.0, nu)):
            a = sigma_asymptotics(s, h)
            worst_diag = max(worst_diag, *(abs(x - target) / target for x in a.limits[:2]))
            worst_off = max(worst_off, abs(a.limits[2]))
    return (worst_diag <= 1e-3 and worst_off <= 1e-6,
            f"diag rel error {worst_diag:.2e} (tol 1e-3), |S12/h| {worst_off:.2e} (tol 1e-6)")


def test_criterion_4_asymptotics():
    ok, line = _record(4, "covariance asymptotics", 2.0, _asymptotics)
    assert ok, line


def _stability_domain():
    rng = np.random.default_rng(20240501)
    n = 10_000
    th = rng.uniform(0.5, 1.0, n)
    h = 10.0 * (1.0 - rng.uniform(0.0, 1.0, n))        # (0, 10]
    nu = 1e3 - (1e3 - 2.0) * rng.uniform(0.0, 1.0, n)  # (2, 1e3]
    unstable = sum(not stability(theta_method(a, c), b).stable for a, b, c in zip(th, h, nu))
    w = find_instability_witness(0.25, trials=1000, seed=0)
    found = "none" if w is None else f"h={w[0]:.3g}, nu={w[1]:.3g}"
    return unstable == 0 and w is not None, f"{unstable}/{n} unstable; theta=0.25 witness {found}"


def test_criterion_5_stability_domain():
    ok, line = _record(5, "stability domain", 2.0, _stability_domain)
    assert ok, line


def _laplace():
    parts, ok = [], True
    for kind in ("quadratic", "shifted_quartic", "double_well"):
        c = laplace_limit_curve(builtin_potential(kind))
        at_max = abs(c.values[-1] - c.Z0)
        extrap = abs(c.extrapolated - c.Z0)
        ok &= at_max <= 0.05 and extrap <= 5e-3
        parts.append(f"{kind} {at_max:.1e}/{extrap:.1e}")
    return ok, "|value(1e3)-Z0| / |extrapolated-Z0|: " + ", ".join(parts) + " (tol 0.05 / 5e-3)"


def test_criterion_6_laplace_limits():
    ok, line = _record(6, "Laplace limits", 10.0, _laplace)
    assert ok, line


def _scaling():
    pts = np.random.default_rng(7).uniform(-2.0, 2.0, (100, 2))
    worst = 0.0
    for kind in ("quadratic", "double_well"):
        V = builtin_potential(kind)
        for nu, eps in ((3.0, 0.5), (2.0, 0.25), (1.0, 2.0)):
            worst = max(worst, scaling_identity_check(nu, eps, V, pts))
    return worst <= 1e-10, f"max density deviation {worst:.2e} (tol 1e-10)"


def test_criterion_7_scaling_identity():
    ok, line = _record(7, "scaling identity", 5.0, _scaling)
    assert ok, line


def _monte_carlo():
    s, h = euler_maruyama(3.0), 1e-3
    burn = default_burn_in(3.0, h)
    cfg = SimulationConfig(s, 1.0, h, 10_000_000 + burn, seed=0)
    summary, _ = run_chains(cfg)
    sigma = closed_form_sigma(s, 1.0, h).sigma
    cov_err = np.linalg.norm(summary.covariance - sigma) / np.linalg.norm(sigma)
    grid = np.geomspace(0.05, 0.5, 10)
    region = BallComplement(1.0)
    cont = decay_rate_estimate(ContinuousGaussian(3.0), grid, region, n_samples=10_000_000,
                               seed=1)
    disc = decay_rate_estimate(s, grid, region, h=h, n_samples=10_000_000, seed=2)
    ok = (summary.n_samples == 10_000_000 and cov_err <= 0.05
          and abs(cont.slope + 3) <= 0.3 and abs(disc.slope + 3) <= 0.3)
    return ok, (f"cov rel error {cov_err:.2%} (tol 5%); slopes continuous {cont.slope:.4f}, "
                f"EM {disc.slope:.4f} vs -3 (tol 10%)")


def test_criterion_8_monte_carlo():
    ok, line = _record(8, "Monte Carlo consistency", 60.0, _monte_carlo)
    assert ok, line


def _legendre():
    worst = 0.0
    for i, (th, nu, h, _) in enumerate(ORACLE_GRID):
        s = theta_method(th, nu)
        rate = rate_small_noise(s, h, check_points=0)
        conj = legendre_quadratic(lmgf_small_noise(s, h).M)
        x = np.random.default_rng(i).standard_normal((20, 2))
        a, b = rate(x[:, 0], x[:, 1]), conj(x[:, 0], x[:, 1])
        worst = max(worst, float(np.max(np.abs(a - b) / np.abs(b))))
    return worst <= 1e-10, f"max rel difference {worst:.2e} (tol 1e-10)"


def test_criterion_9_legendre_self_consistency():
    ok, line = _record(9, "Legendre self-consistency", 5.0, _legendre)
    assert ok, line


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
