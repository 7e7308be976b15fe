import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from langevin_ldp.errors import ConfigurationError
from langevin_ldp.potentials import (GrowthCertificate, Potential, builtin_potential,
                                     check_gradient, check_growth, locate_infimum)


@pytest.mark.parametrize("kind", ["quadratic", "quartic", "double_well", "shifted_quartic"])
def test_builtin_certificates_hold(kind):
    V = builtin_potential(kind)
    assert check_growth(V)
    assert check_gradient(V) < 1e-6


def test_unknown_kind():
    with pytest.raises(ConfigurationError, match="unknown potential"):
        builtin_potential("sextic")


def test_bad_parameter_name():
    with pytest.raises(ConfigurationError):
        builtin_potential("quadratic", stifness=2.0)


def test_invalid_certificate_rejected():
    with pytest.raises(ConfigurationError):
        Potential("bad", lambda q: q * q, lambda q: 2 * q, GrowthCertificate(1.0, 2.0, 0.5))


def test_false_certificate_detected():
    # q^2/2 does not dominate q^2 anywhere
    V = Potential("liar", lambda q: 0.5 * q * q, lambda q: q, GrowthCertificate(1.0, 2.0, 1.0))
    assert not check_growth(V)


@pytest.mark.parametrize("kind, q_star, v_star", [
    ("quadratic", 0.0, 0.0),
    ("quartic", 0.0, 0.0),
    ("double_well", -1.0, 0.0),
    ("shifted_quartic", 0.0, 1.0),
])
def test_locate_infimum(kind, q_star, v_star):
    q, v = locate_infimum(builtin_potential(kind))
    assert q == pytest.approx(q_star, abs=1e-6)
    assert v == pytest.approx(v_star, abs=1e-12)


def test_double_well_tie_prefers_left():
    q, _ = locate_infimum(builtin_potential("double_well", well=2.0))
    assert q == pytest.approx(-2.0, abs=1e-8)


def test_negative_offset_certificate():
    V = builtin_potential("shifted_quartic", offset=-3.0)
    assert check_growth(V)
    assert locate_infimum(V)[1] == pytest.approx(-3.0, abs=1e-12)


def test_scalar_only_callable_vectorizes():
    V = Potential("scalar", lambda q: math.cosh(q) - 1.0, math.sinh,
                  GrowthCertificate(0.1, 2.0, 1.0))
    np.testing.assert_allclose(V.values([0.0, 1.0]), [0.0, math.cosh(1.0) - 1.0])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0))
def test_double_well_minimum_value_zero(a):
    _, v = locate_infimum(builtin_potential("double_well", well=a))
    assert 0.0 <= v <= 1e-10 * max(1.0, a ** 4)
