"""Exact invariant law of the Langevin equation and its large deviations.

The Langevin system ``dP = -(nu P + V'(Q)) dt + sqrt(eps) dW, dQ = P dt`` has
the Boltzmann-Gibbs invariant density

    rho(p, q) = exp(-(2 nu / eps) (p^2 / 2 + V(q))) / Z,

whose ``p`` marginal integrates in closed form, leaving a one-dimensional
quadrature for ``Z``.  Every integral here is computed relative to the
integrand maximum so that large ``nu / eps`` does not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .extrapolate import laplace_limit
from .potentials import Potential, locate_infimum
from .quadrature import adaptive_simpson

__all__ = [
    "GibbsMeasure",
    "ContinuousRate",
    "LaplaceCurve",
    "partition_function",
    "log_partition_function",
    "density",
    "scaling_identity_check",
    "laplace_limit_curve",
    "tail_bound_check",
    "continuous_rate",
    "default_nu_grid",
    "truncation_radius",
]

_SAFETY = 20.0


def default_nu_grid():
    return np.geomspace(1.0, 1e3, 16)


def truncation_radius(potential, beta, rel_tol, v_star):
    """Half-width ``L`` outside which ``exp(-beta V)`` carries < rel_tol of the mass."""
    eta, alpha, L0 = potential.growth
    k = math.log(1.0 / rel_tol) + _SAFETY
    L = max(L0, potential.minimizer_bound(), (k / (beta * eta)) ** (1.0 / alpha))
    # V >= eta |q|^alpha only beats the minimum value V* once eta L^alpha > V*
    need = v_star + k / beta
    if need > 0:
        L = max(L, (need / eta) ** (1.0 / alpha))
    return L


def _local_minima(potential, lo, hi, n=2001):
    x = np.linspace(lo, hi, n)
    v = potential.values(x)
    inner = (v[1:-1] <= v[:-2]) & (v[1:-1] <= v[2:])
    return x[1:-1][inner].tolist()


def _log_integral(potential, beta, lo, hi, shift, rel_tol):
    """``ln int_lo^hi exp(-beta V)`` computed as ``-beta shift + ln int exp(-beta (V - shift))``."""
    vf = potential.value_fn

    def f(q):
        return math.exp(-beta * (float(vf(q)) - shift))

    # V - shift cancels near the minimum: the exponent carries an absolute
    # error of about beta |shift| ulp, which caps the attainable accuracy
    noise = 16.0 * beta * max(abs(shift), 1.0) * np.finfo(float).eps
    value, _ = adaptive_simpson(f, lo, hi, rel_tol=max(rel_tol, noise), noise_rel=noise,
                                breakpoints=_local_minima(potential, lo, hi))
    return -beta * shift + math.log(value)


def _log_q_integral(potential, beta, rel_tol, v_star):
    L = truncation_radius(potential, beta, rel_tol, v_star)
    return _log_integral(potential, beta, -L, L, v_star, rel_tol)


def log_partition_function(nu, eps, potential, rel_tol=1e-10, v_star=None):
    if not (nu > 0 and eps > 0 and rel_tol > 0):
        raise ConfigurationError("nu, eps and rel_tol must be positive")
    if v_star is None:
        v_star = locate_infimum(potential)[1]
    beta = 2.0 * nu / eps
    return 0.5 * math.log(math.pi * eps / nu) + _log_q_integral(potential, beta, rel_tol, v_star)


def partition_function(nu, eps, potential, rel_tol=1e-10):
    """Partition function ``Z`` of the Gibbs measure (may over/underflow; see ``log_Z``)."""
    return math.exp(log_partition_function(nu, eps, potential, rel_tol))


@dataclass
class GibbsMeasure:
    """Invariant law ``mu_{nu, eps}`` with a lazily computed partition function."""

    nu: float
    eps: float
    potential: Potential
    rel_tol: float = 1e-10
    _infimum: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.nu > 0 and self.eps > 0):
            raise ConfigurationError("nu and eps must be positive")

    @property
    def beta(self):
        return 2.0 * self.nu / self.eps

    @property
    def infimum(self):
        if self._infimum is None:
            self._infimum = locate_infimum(self.potential)
        return self._infimum

    @property
    def Z0(self):
        return -2.0 * self.infimum[1]

    @cached_property
    def log_Z(self):
        return log_partition_function(self.nu, self.eps, self.potential, self.rel_tol,
                                      v_star=self.infimum[1])

    @property
    def Z(self):
        return math.exp(self.log_Z)

    def log_density(self, p, q):
        p = np.asarray(p, dtype=float)
        return -self.beta * (0.5 * p * p + self.potential.values(q)) - self.log_Z

    def density(self, p, q):
        return np.exp(self.log_density(p, q))

    def truncation_box(self):
        """``(p_max, q_max)`` bounding the region carrying all but ~rel_tol of the mass."""
        k = math.log(1.0 / self.rel_tol) + _SAFETY
        p_max = math.sqrt(2.0 * k / self.beta)
        q_max = truncation_radius(self.potential, self.beta, self.rel_tol, self.infimum[1])
        return p_max, q_max


def density(measure, p, q):
    return measure.density(p, q)


def scaling_identity_check(nu, eps, potential, test_points, rel_tol=1e-10):
    """Largest ``|rho_{nu,eps} - rho_{nu/eps,1}|`` over ``test_points``.

    The two measures coincide because ``2 nu / eps`` is the only combination
    of the parameters entering the density.
    """
    pts = np.asarray(test_points, dtype=float).reshape(-1, 2)
    inf = locate_infimum(potential)
    a = GibbsMeasure(nu, eps, potential, rel_tol, _infimum=inf)
    b = GibbsMeasure(nu / eps, 1.0, potential, rel_tol, _infimum=inf)
    da = a.density(pts[:, 0], pts[:, 1])
    db = b.density(pts[:, 0], pts[:, 1])
    return float(np.max(np.abs(da - db)))


@dataclass(frozen=True)
class LaplaceCurve:
    nu: np.ndarray
    values: np.ndarray
    Z0: float
    extrapolated: float

    @property
    def abs_error(self):
        return np.abs(self.values - self.Z0)

    def converged(self, tol=0.05):
        """Both the last grid value and the extrapolation are within ``tol`` of ``Z0``."""
        return bool(abs(self.values[-1] - self.Z0) <= tol and abs(self.extrapolated - self.Z0) <= tol)

    def rows(self):
        return [(float(n), float(v), self.Z0, float(abs(v - self.Z0)))
                for n, v in zip(self.nu, self.values)]


def laplace_limit_curve(potential, nu_grid=None, rel_tol=1e-10):
    """Sample ``(1/nu) ln int exp(-2 nu V(q)) dq`` on ``nu_grid``.

    The curve tends to ``Z0 = -2 inf V``.
    """
    nu = np.asarray(default_nu_grid() if nu_grid is None else nu_grid, dtype=float)
    if np.any(nu <= 0):
        raise ConfigurationError("nu_grid entries must be positive")
    v_star = locate_infimum(potential)[1]
    vals = np.array([_log_q_integral(potential, 2.0 * n, rel_tol, v_star) / n for n in nu])
    Z0 = -2.0 * v_star
    extrap = laplace_limit(nu, vals) if nu.size >= 3 else float(vals[-1])
    return LaplaceCurve(nu=nu, values=vals, Z0=Z0, extrapolated=extrap)


def tail_bound_check(potential, L, nu_grid=None, rel_tol=1e-10):
    """Sample ``(1/nu) ln int_{|q| >= L} exp(-nu V(q)) dq`` on ``nu_grid``.

    For ``L >= L0`` the limsup is bounded by ``-eta L^alpha / 2``.
    """
    eta, alpha, L0 = potential.growth
    if L < L0:
        raise ConfigurationError(f"L={L} is below the certificate radius L0={L0}")
    nu = np.asarray(default_nu_grid() if nu_grid is None else nu_grid, dtype=float)
    if np.any(nu <= 0):
        raise ConfigurationError("nu_grid entries must be positive")
    k = math.log(1.0 / rel_tol) + _SAFETY
    v_L = max(float(potential.value_fn(L)), float(potential.value_fn(-L)))
    out = []
    for n in nu:
        R = max(2.0 * L, ((v_L + k / n) / eta) ** (1.0 / alpha))
        grid = np.linspace(L, R, 2001)
        shift = float(min(potential.values(grid).min(), potential.values(-grid).min()))
        right = _log_integral(potential, n, L, R, shift, rel_tol)
        left = _log_integral(potential, n, -R, -L, shift, rel_tol)
        out.append(np.logaddexp(right, left) / n)
    return np.array(out)


@dataclass(frozen=True)
class ContinuousRate:
    """Rate function of ``mu_{nu,eps}`` in the small-noise or strong-dissipation limit.

    ``small_noise`` (eps -> 0, fixed ``nu``):  ``nu (p^2 + 2 V(q) + Z0)``.
    ``strong_dissipation`` (nu -> inf, fixed ``eps``):  ``(p^2 + 2 V(q) + Z0) / eps``.
    """

    kind: str
    nu_or_eps: float
    potential: Potential
    Z0: float

    def __call__(self, p, q):
        p = np.asarray(p, dtype=float)
        base = p * p + 2.0 * self.potential.values(q) + self.Z0
        if self.kind == "small_noise":
            out = self.nu_or_eps * base
        else:
            out = base / self.nu_or_eps
        return out if out.ndim else float(out)


def continuous_rate(kind, fixed_param, potential):
    if kind not in ("small_noise", "strong_dissipation"):
        raise ConfigurationError(f"unknown rate kind {kind!r}")
    if not fixed_param > 0:
        raise ConfigurationError("fixed parameter must be positive")
    Z0 = -2.0 * locate_infimum(potential)[1]
    return ContinuousRate(kind, float(fixed_param), potential, Z0)
