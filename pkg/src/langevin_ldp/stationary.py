"""Stationary Gaussian law ``N(0, Sigma)`` of a stable linear scheme.

Two independent computations are provided:

* :func:`closed_form_sigma` evaluates the eigenvalue expansion of the
  stationary covariance (three geometric series in ``lam1^2``, ``lam2^2`` and
  ``lam1 lam2``) in complex arithmetic;
* :func:`lyapunov_sigma` solves ``Sigma = A Sigma A^T + eps h b b^T``
  directly as a linear system in ``(s11, s12, s22)``.

The Lyapunov route has no eigenvalue restriction and is the ground truth in
tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ConvergenceError, DegenerateSpectrumError, StabilityError
from .extrapolate import limit_at_zero
from .schemes import spectrum, stability

__all__ = [
    "StationaryCovariance",
    "SigmaAsymptotics",
    "closed_form_sigma",
    "lyapunov_sigma",
    "lyapunov_residual",
    "sigma_asymptotics",
    "is_degenerate",
]

_DEGENERATE_RTOL = 1e-12
_IMAG_RTOL = 1e-10


@dataclass(frozen=True)
class StationaryCovariance:
    """Covariance of the invariant Gaussian.

    ``sigma = prefactor * [[S11, S12], [S12, S22]]`` with
    ``prefactor = eps h / (lam2 - lam1)^2``.  For complex eigenvalues
    ``(lam2 - lam1)^2`` is negative, and so are the components.
    """

    sigma: np.ndarray
    components: tuple  # (S11, S22, S12)
    prefactor: float
    params: dict
    method: str
    residual: float
    warning: str = ""
    extras: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        return {
            "method": self.method,
            "sigma": [[float(x) for x in row] for row in self.sigma],
            "components": {"S11": self.components[0], "S22": self.components[1],
                           "S12": self.components[2]},
            "prefactor": self.prefactor,
            "residual": self.residual,
            "warning": self.warning,
            "params": dict(self.params),
        }


def lyapunov_residual(sigma, A, b, eps, h):
    """``||Sigma - A Sigma A^T - eps h b b^T||_F / ||Sigma||_F``."""
    C = eps * h * np.outer(b, b)
    r = sigma - A @ sigma @ A.T - C
    n = np.linalg.norm(sigma)
    return float(np.linalg.norm(r) / n) if n > 0 else float(np.linalg.norm(r))


def is_degenerate(sp):
    scale = (2.0 - sp.tr) ** 2 + 4.0 * abs(sp.stable_margins[0])
    return abs(sp.disc) <= _DEGENERATE_RTOL * max(scale, 1e-300)


def _check_inputs(scheme, eps, h):
    if not eps >= 0:
        raise ConfigurationError("eps must be non-negative")
    if not h > 0:
        raise ConfigurationError("h must be positive")
    rep = stability(scheme, h)
    if not rep.stable:
        raise StabilityError(
            f"{scheme.name} is unstable at h={h} (spectral radius {rep.spectral_radius:.6g})")
    return rep


def _params(scheme, eps, h):
    return {"scheme": scheme.name, "nu": scheme.nu, "eps": float(eps), "h": float(h),
            "theta": scheme.theta}


def _components(A, b, sp):
    a11, a12, a21, a22 = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    b1, b2 = b
    u1, u2 = sp.a11_minus                        # a11 - lam1, a11 - lam2
    d1 = sp.one_minus[0] * sp.one_plus[0]        # 1 - lam1^2
    d2 = sp.one_minus[1] * sp.one_plus[1]        # 1 - lam2^2
    d12 = sp.one_minus_det                       # 1 - lam1 lam2
    off = a12 * a21
    dd = a22 - a11

    s11 = ((a12 * b2 + b1 * u2) ** 2 / d1
           + (a12 * b2 + b1 * u1) ** 2 / d2
           + (2 * off * b1 * b1 - 2 * a12 * a12 * b2 * b2 + 2 * a12 * b1 * b2 * dd) / d12)
    s22 = ((a21 * b1 - b2 * u1) ** 2 / d1
           + (a21 * b1 - b2 * u2) ** 2 / d2
           + (2 * off * b2 * b2 - 2 * a21 * a21 * b1 * b1 - 2 * a21 * b1 * b2 * dd) / d12)
    s12 = ((a21 * u2 * b1 * b1 - a12 * u1 * b2 * b2 + 2 * off * b1 * b2) / d1
           + (a21 * u1 * b1 * b1 - a12 * u2 * b2 * b2 + 2 * off * b1 * b2) / d2
           + dd * (a21 * b1 * b1 - a12 * b2 * b2 + b1 * b2 * dd) / d12)
    return s11, s22, s12


def closed_form_sigma(scheme, eps, h):
    """Stationary covariance from the eigenvalue expansion.

    Raises
    ------
    StabilityError
        If the scheme is not stable at ``h``.
    DegenerateSpectrumError
        If ``A(h)`` has repeated eigenvalues; use :func:`lyapunov_sigma`.
    """
    _check_inputs(scheme, eps, h)
    A, b = scheme.coefficients(h)
    sp = spectrum(A)
    if is_degenerate(sp):
        raise DegenerateSpectrumError(
            f"{scheme.name} at h={h}: repeated eigenvalues (discriminant {sp.disc:.3e}); "
            "the closed form does not apply, use the Lyapunov solver")
    comps = _components(A, b, sp)
    scale = max(abs(c) for c in comps)
    imag = max(abs(complex(c).imag) for c in comps)
    if imag > _IMAG_RTOL * scale:
        raise ArithmeticError(f"closed form left an imaginary part {imag:.3e} (scale {scale:.3e})")
    s11, s22, s12 = (float(complex(c).real) for c in comps)
    prefactor = eps * h / sp.disc
    sigma = prefactor * np.array([[s11, s12], [s12, s22]])
    return StationaryCovariance(
        sigma=sigma, components=(s11, s22, s12), prefactor=prefactor,
        params=_params(scheme, eps, h), method="closed",
        residual=lyapunov_residual(sigma, A, b, eps, h),
        extras={"disc": sp.disc, "lambda1": sp.lam1, "lambda2": sp.lam2})


_BASIS = (np.array([[1.0, 0.0], [0.0, 0.0]]),
          np.array([[0.0, 1.0], [1.0, 0.0]]),
          np.array([[0.0, 0.0], [0.0, 1.0]]))


def _smith_doubling(A, C, tol=1e-14, max_iter=10**6):
    S = C.copy()
    Ak = A.copy()
    for _ in range(max_iter):
        inc = Ak @ S @ Ak.T
        S = S + inc
        if np.linalg.norm(inc) <= tol * np.linalg.norm(S):
            return S
        Ak = Ak @ Ak
    raise ConvergenceError("Lyapunov fixed-point iteration did not converge",
                           float(np.linalg.norm(inc) / max(np.linalg.norm(S), 1e-300)))


def lyapunov_sigma(scheme, eps, h, cond_limit=1e12):
    """Solve ``Sigma = A Sigma A^T + eps h b b^T`` for the stationary covariance.

    Writing ``A = I + E`` turns the equation into
    ``E S + S E^T + E S E^T = -eps h b b^T``, a 3x3 system whose matrix is
    built from ``E`` without the cancellation in ``I - A (x) A``.  If that
    system is worse conditioned than ``cond_limit`` the doubling fixed-point
    iteration ``S <- S + A_k S A_k^T, A_k <- A_k^2`` is used instead.
    """
    _check_inputs(scheme, eps, h)
    A, b = scheme.coefficients(h)
    C = eps * h * np.outer(b, b)
    E = A - np.eye(2)
    L = np.empty((3, 3))
    for j, B in enumerate(_BASIS):
        R = E @ B + B @ E.T + E @ B @ E.T
        L[:, j] = (R[0, 0], R[0, 1], R[1, 1])
    rhs = -np.array([C[0, 0], C[0, 1], C[1, 1]])
    method = "lyapunov"
    if np.linalg.cond(L) > cond_limit:
        sigma = _smith_doubling(A, C)
        sigma = 0.5 * (sigma + sigma.T)
        method = "lyapunov-iteration"
    else:
        x = np.linalg.solve(L, rhs)
        sigma = np.array([[x[0], x[1]], [x[1], x[2]]])
    sp = spectrum(A)
    warning = ""
    if is_degenerate(sp):
        prefactor = math.nan
        comps = (math.nan, math.nan, math.nan)
        warning = ("repeated eigenvalues: covariance is valid but the small-noise "
                   "rate construction does not apply")
    else:
        prefactor = eps * h / sp.disc
        if prefactor != 0:
            comps = (sigma[0, 0] / prefactor, sigma[1, 1] / prefactor, sigma[0, 1] / prefactor)
        else:
            comps = (math.nan, math.nan, math.nan)
    return StationaryCovariance(
        sigma=sigma, components=tuple(float(c) for c in comps), prefactor=float(prefactor),
        params=_params(scheme, eps, h), method=method,
        residual=lyapunov_residual(sigma, A, b, eps, h), warning=warning)


@dataclass(frozen=True)
class SigmaAsymptotics:
    h: np.ndarray
    ratios: np.ndarray    # columns S11/h, S22/h, S12/h
    limits: np.ndarray
    expected: np.ndarray

    def rows(self):
        return [(float(x), *map(float, r)) for x, r in zip(self.h, self.ratios)]


def sigma_asymptotics(scheme, h_grid):
    """Ratios ``S11/h, S22/h, S12/h`` along ``h_grid`` and their ``h -> 0`` limits.

    Expected limits are ``(nu^2 - 4)/(2 nu)`` for both diagonal ratios and 0
    for the off-diagonal one.
    """
    nu = scheme.nu
    if nu == 2.0:
        raise DegenerateSpectrumError("nu = 2 has repeated eigenvalues at leading order")
    h = np.asarray(h_grid, dtype=float)
    ratios = np.array([np.array(closed_form_sigma(scheme, 1.0, x).components) / x for x in h])
    limits = np.array([limit_at_zero(h, ratios[:, k]) for k in range(3)])
    target = (nu * nu - 4.0) / (2.0 * nu)
    return SigmaAsymptotics(h=h, ratios=ratios, limits=limits,
                            expected=np.array([target, target, 0.0]))
