import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from langevin_ldp.errors import ConfigurationError
from langevin_ldp.schemes import (assumption2_orders, build_scheme, discriminant_expansion_check,
                                  euler_maruyama, find_instability_witness, satisfies_assumption2,
                                  spectrum, stability, tabulated_scheme, theta_method)

H_GRID = np.geomspace(1e-1, 1e-4, 12)


def test_em_coefficients():
    A, b = euler_maruyama(3.0).coefficients(0.1)
    np.testing.assert_allclose(A, [[0.7, -0.1], [0.1, 1.0]], rtol=1e-15)
    np.testing.assert_array_equal(b, [1.0, 0.0])
    r = stability(euler_maruyama(3.0), 0.1)
    assert r.tr == pytest.approx(1.7)
    assert r.det == pytest.approx(0.71)


def test_theta_coefficients():
    A = theta_method(0.5, 3.0).A(0.1)
    assert A[0, 0] == pytest.approx((1 - 0.1525) / 1.1525, rel=1e-14)
    assert A[0, 0] == pytest.approx(0.7353579, abs=1e-7)


def test_theta_one_a11():
    h, nu = 0.37, 2.5
    A = theta_method(1.0, nu).A(h)
    assert A[0, 0] == pytest.approx(1.0 / (1.0 + h * h + nu * h), rel=1e-15)


def test_theta_zero_is_em():
    for h in (1e-3, 0.1, 0.7):
        a0, b0 = theta_method(0.0, 3.0).coefficients(h)
        a1, b1 = euler_maruyama(3.0).coefficients(h)
        np.testing.assert_array_equal(a0, a1)
        np.testing.assert_array_equal(b0, b1)


def test_theta_solves_implicit_step():
    # X1 = X0 + h f(theta X1 + (1-theta) X0) + sqrt(eps) dW e1, with f(p,q) = (-nu p - q, p)
    th, nu, h = 0.7, 4.0, 0.3
    F = np.array([[-nu, -1.0], [1.0, 0.0]])
    M = np.eye(2) - th * h * F
    A_ref = np.linalg.solve(M, np.eye(2) + (1 - th) * h * F)
    b_ref = np.linalg.solve(M, [1.0, 0.0])
    A, b = theta_method(th, nu).coefficients(h)
    np.testing.assert_allclose(A, A_ref, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(b, b_ref, rtol=1e-14, atol=1e-15)


def test_invalid_construction():
    with pytest.raises(ConfigurationError):
        theta_method(1.5, 3.0)
    with pytest.raises(ConfigurationError):
        euler_maruyama(0.0)
    with pytest.raises(ConfigurationError):
        build_scheme("rk4", 3.0)
    with pytest.raises(ConfigurationError):
        euler_maruyama(3.0).coefficients(0.0)


def test_assumption2_orders():
    assert assumption2_orders(euler_maruyama(3.0), H_GRID) == (math.inf, math.inf)
    for th in (0.5, 1.0):
        oa, ob = assumption2_orders(theta_method(th, 3.0), H_GRID)
        assert oa == pytest.approx(2.0, abs=0.05)
        assert ob == pytest.approx(1.0, abs=0.05)
        assert satisfies_assumption2((oa, ob))


def test_assumption2_grid_checks():
    with pytest.raises(ConfigurationError):
        assumption2_orders(euler_maruyama(3.0), [1e-2, 5e-2])
    with pytest.raises(ConfigurationError):
        assumption2_orders(euler_maruyama(3.0), [1e-3, 2.0])


def test_stability_examples():
    assert stability(theta_method(0.5, 3.0), 1.0).stable
    r = stability(euler_maruyama(3.0), 1.0)
    assert r.det == pytest.approx(-1.0)
    assert r.tr == pytest.approx(-1.0)
    assert not r.stable


def test_discriminant_expansion():
    # exact value is 0; rounding 1 - nu h to a double costs about ulp / h after dividing by h^3
    assert discriminant_expansion_check(euler_maruyama(3.0), H_GRID) < 1e-6
    assert discriminant_expansion_check(theta_method(0.5, 3.0), H_GRID) < 100.0
    sp = spectrum(theta_method(1.0, 1.0).A(1e-2))
    assert sp.disc < 0


def test_instability_witness():
    w = find_instability_witness(0.25, trials=1000)
    assert w is not None
    h, nu = w
    assert not stability(theta_method(0.25, nu), h).stable


def test_tabulated_scheme_lookup():
    s = tabulated_scheme("half", 1.0, [1.0], [np.diag([0.5, 0.5])], [[1.0, 1.0]])
    np.testing.assert_array_equal(s.A(1.0), np.diag([0.5, 0.5]))
    with pytest.raises(ConfigurationError):
        s.A(0.5)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(1e-3, 10.0), st.floats(0.05, 1e3))
def test_report_consistency(theta, h, nu):
    r = stability(theta_method(theta, nu), h)
    scale = max(1.0, abs(r.tr), abs(r.det))
    assert abs(r.lambda1 + r.lambda2 - r.tr) <= 1e-12 * scale
    assert abs(r.lambda1 * r.lambda2 - r.det) <= 1e-12 * scale
    # the coefficient test agrees with the eigenvalue test away from the boundary
    if abs(r.spectral_radius - 1.0) > 1e-9:
        assert r.stable == (r.spectral_radius < 1.0)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.5, 1.0), st.floats(1e-6, 10.0), st.floats(2.0, 1e3, exclude_min=True))
def test_theta_stable_above_half(theta, h, nu):
    assert stability(theta_method(theta, nu), h).stable


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(1e-3, 1.0), st.floats(2.01, 1e3))
def test_theta_eigenvalue_formula(theta, h, nu):
    d = theta * (theta * h * h + nu * h)
    base = 2 + nu * h * (2 * theta - 1) - 2 * theta * (1 - theta) * h * h
    root = math.sqrt(nu * nu - 4) * h
    expect = sorted([(base + root) / (2 * (1 + d)), (base - root) / (2 * (1 + d))])
    r = stability(theta_method(theta, nu), h)
    got = sorted([r.lambda1.real, r.lambda2.real])
    np.testing.assert_allclose(got, expect, rtol=1e-10, atol=1e-12)
