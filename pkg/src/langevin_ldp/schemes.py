"""Linear one-step schemes for the harmonic Langevin equation.

For ``V(q) = q^2 / 2`` every scheme considered here is an affine Gaussian
recursion

    X_{n+1} = A(h) X_n + sqrt(eps) b(h) dW_n,      X = (P, Q),

with ``A`` and ``b`` depending on the step size ``h`` and the dissipation
``nu`` but never on the noise intensity ``eps``.

Spectral quantities are evaluated in a cancellation-free way: for a 2x2
matrix with entries near ``+-1``, the differences ``1 - a_ii`` and
``1 + a_ii`` are exact in floating point, so the products
``(1 - l1)(1 - l2)``, ``(1 + l1)(1 + l2)`` and ``(a11 - l1)(a11 - l2)`` can be
formed without loss and the small member of each root pair recovered by
division.  This keeps ``1 - lambda^2`` accurate when an eigenvalue sits at
distance ``O(h)`` from the unit circle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "LinearScheme",
    "Spectrum",
    "StabilityReport",
    "euler_maruyama",
    "theta_method",
    "tabulated_scheme",
    "build_scheme",
    "spectrum",
    "stability",
    "assumption2_residuals",
    "assumption2_orders",
    "satisfies_assumption2",
    "discriminant_expansion_check",
    "find_instability_witness",
]


@dataclass(frozen=True)
class LinearScheme:
    """Coefficient maps ``h -> A(h)`` (2x2) and ``h -> b(h)`` (2,)."""

    name: str
    nu: float
    A_fn: Callable[[float], np.ndarray]
    b_fn: Callable[[float], np.ndarray]
    theta: Optional[float] = None
    params: dict = field(default_factory=dict)

    def A(self, h):
        return np.asarray(self.A_fn(float(h)), dtype=float)

    def b(self, h):
        return np.asarray(self.b_fn(float(h)), dtype=float)

    def coefficients(self, h):
        if not h > 0:
            raise ConfigurationError("step size h must be positive")
        return self.A(h), self.b(h)


def euler_maruyama(nu):
    """Explicit Euler-Maruyama: ``A = [[1 - nu h, -h], [h, 1]]``, ``b = (1, 0)``."""
    if not nu > 0:
        raise ConfigurationError("nu must be positive")
    nu = float(nu)

    def A(h):
        return np.array([[1.0 - nu * h, -h], [h, 1.0]])

    def b(h):
        return np.array([1.0, 0.0])

    return LinearScheme("euler_maruyama", nu, A, b, params={"scheme": "em", "nu": nu})


def theta_method(theta, nu):
    """Stochastic theta-method (implicit in the drift with weight ``theta``).

    With ``D = theta (theta h^2 + nu h)``::

        A = 1/(1+D) [[1 - (theta h^2 + nu h)(1 - theta), -h],
                     [h, 1 - theta (1 - theta) h^2 + nu theta h]]
        b = 1/(1+D) (1, theta h)
    """
    if not 0.0 <= theta <= 1.0:
        raise ConfigurationError(f"theta={theta} outside [0, 1]")
    if not nu > 0:
        raise ConfigurationError("nu must be positive")
    th, nu = float(theta), float(nu)

    def A(h):
        g = th * h * h + nu * h
        d = 1.0 + th * g
        return np.array([[(1.0 - g * (1.0 - th)) / d, -h / d],
                         [h / d, (1.0 - th * (1.0 - th) * h * h + nu * th * h) / d]])

    def b(h):
        d = 1.0 + th * (th * h * h + nu * h)
        return np.array([1.0 / d, th * h / d])

    return LinearScheme(f"theta_method({th:g})", nu, A, b, theta=th,
                        params={"scheme": "theta", "theta": th, "nu": nu})


def tabulated_scheme(name, nu, h_values, A_values, b_values, rtol=1e-12):
    """Scheme given by coefficient tables; only the tabulated ``h`` are valid."""
    hs = np.asarray(h_values, dtype=float)
    As = np.asarray(A_values, dtype=float).reshape(-1, 2, 2)
    bs = np.asarray(b_values, dtype=float).reshape(-1, 2)
    if not (hs.size == As.shape[0] == bs.shape[0]):
        raise ConfigurationError("coefficient tables have mismatched lengths")

    def lookup(h):
        i = int(np.argmin(np.abs(hs - h)))
        if abs(hs[i] - h) > rtol * abs(h):
            raise ConfigurationError(f"{name}: step size {h} is not tabulated")
        return i

    return LinearScheme(name, float(nu), lambda h: As[lookup(h)], lambda h: bs[lookup(h)],
                        params={"scheme": "table", "nu": float(nu)})


def build_scheme(kind, nu, theta=None):
    """Factory used by configs and the CLI (``kind`` in ``{'em', 'theta'}``)."""
    if kind in ("em", "euler_maruyama"):
        return euler_maruyama(nu)
    if kind in ("theta", "theta_method"):
        if theta is None:
            raise ConfigurationError("theta scheme requires --theta")
        return theta_method(theta, nu)
    raise ConfigurationError(f"unknown scheme {kind!r}; expected 'em' or 'theta'")


# -- spectral analysis ------------------------------------------------------

def _split_pair(x1, x2, product):
    # x1 + x2 is known accurately and so is x1 * x2; keep the larger root as
    # computed and recover the smaller one from the product.
    if abs(x1) >= abs(x2):
        return x1, (product / x1 if x1 != 0 else x2)
    return (product / x2 if x2 != 0 else x1), x2


@dataclass(frozen=True)
class Spectrum:
    """Eigen-data of a 2x2 propagation matrix.

    ``lam1 = (tr + s) / 2`` and ``lam2 = (tr - s) / 2`` with ``s`` the principal
    complex square root of the discriminant ``tr^2 - 4 det``.
    """

    tr: float
    det: float
    disc: float
    s: complex
    lam1: complex
    lam2: complex
    one_minus: tuple   # (1 - lam1, 1 - lam2)
    one_plus: tuple    # (1 + lam1, 1 + lam2)
    a11_minus: tuple   # (a11 - lam1, a11 - lam2)
    one_minus_det: float
    stable_margins: tuple  # (1 - tr + det, 1 + tr + det, 1 - det)


def spectrum(A):
    A = np.asarray(A, dtype=float)
    a11, a12, a21, a22 = float(A[0, 0]), float(A[0, 1]), float(A[1, 0]), float(A[1, 1])
    m11, m22 = 1.0 - a11, 1.0 - a22
    p11, p22 = 1.0 + a11, 1.0 + a22
    off = a12 * a21
    minus_prod = m11 * m22 - off          # (1 - l1)(1 - l2) = 1 - tr + det
    plus_prod = p11 * p22 - off           # (1 + l1)(1 + l2) = 1 + tr + det
    two_minus_tr = m11 + m22
    disc = two_minus_tr * two_minus_tr - 4.0 * minus_prod
    s = cmath.sqrt(disc)
    tr = a11 + a22
    det = a11 * a22 - off
    one_minus_det = m11 + a11 * m22 + off

    om = _split_pair((two_minus_tr - s) / 2.0, (two_minus_tr + s) / 2.0, minus_prod)
    op = _split_pair((p11 + p22 + s) / 2.0, (p11 + p22 - s) / 2.0, plus_prod)
    am = _split_pair((a11 - a22 - s) / 2.0, (a11 - a22 + s) / 2.0, -off)

    if disc >= 0.0 and tr != 0.0:
        if tr > 0:
            lam1 = complex((tr + s.real) / 2.0)
            lam2 = complex(det / lam1.real) if lam1.real != 0 else complex((tr - s.real) / 2.0)
        else:
            lam2 = complex((tr - s.real) / 2.0)
            lam1 = complex(det / lam2.real) if lam2.real != 0 else complex((tr + s.real) / 2.0)
    else:
        lam1 = (tr + s) / 2.0
        lam2 = (tr - s) / 2.0
    return Spectrum(tr=tr, det=det, disc=disc, s=s, lam1=lam1, lam2=lam2,
                    one_minus=om, one_plus=op, a11_minus=am, one_minus_det=one_minus_det,
                    stable_margins=(minus_prod, plus_prod, one_minus_det))


@dataclass(frozen=True)
class StabilityReport:
    h: float
    tr: float
    det: float
    lambda1: complex
    lambda2: complex
    spectral_radius: float
    stable: bool
    discriminant: float

    def as_row(self):
        return (self.h, self.tr, self.det, self.lambda1.real, self.lambda1.imag,
                self.lambda2.real, self.lambda2.imag, int(self.stable))


def stability(scheme, h):
    """Mean-square stability of ``scheme`` at step ``h``.

    The verdict is ``|tr A| < 1 + det A < 2``, evaluated through the
    equivalent positivity of ``1 - tr + det``, ``1 + tr + det`` and ``1 - det``.
    """
    A = scheme.A(h)
    sp = spectrum(A)
    stable = all(m > 0.0 for m in sp.stable_margins)
    rho = max(abs(sp.lam1), abs(sp.lam2))
    return StabilityReport(h=float(h), tr=sp.tr, det=sp.det, lambda1=sp.lam1, lambda2=sp.lam2,
                           spectral_radius=rho, stable=stable, discriminant=sp.disc)


# -- consistency diagnostics ------------------------------------------------

def assumption2_residuals(scheme, h):
    A, b = scheme.coefficients(h)
    nu = scheme.nu
    rA = (abs(A[0, 0] - 1.0 + nu * h) + abs(A[0, 1] + h)
          + abs(A[1, 0] - h) + abs(A[1, 1] - 1.0))
    rb = abs(b[0] - 1.0) + abs(b[1])
    return float(rA), float(rb)


def _loglog_slope(h, r, floor=1e-14):
    if np.all(r < floor):
        return math.inf
    keep = r > 0
    if keep.sum() < 2:
        return math.inf
    slope, _ = np.polyfit(np.log(h[keep]), np.log(r[keep]), 1)
    return float(slope)


def assumption2_orders(scheme, h_grid):
    """Observed orders of the consistency residuals.

    ``r_A = |a11 - 1 + nu h| + |a12 + h| + |a21 - h| + |a22 - 1|`` should be
    ``O(h^2)`` and ``r_b = |b1 - 1| + |b2|`` should be ``O(h)``.  Slopes are
    least-squares fits in log-log over the smaller half of ``h_grid``;
    identically vanishing residuals give ``inf``.
    """
    h = np.sort(np.asarray(h_grid, dtype=float))
    if np.any(h <= 0) or np.any(h >= 1):
        raise ConfigurationError("h_grid values must lie in (0, 1)")
    if h[-1] / h[0] < 100.0 * (1 - 1e-12):
        raise ConfigurationError("h_grid must span at least two decades")
    res = np.array([assumption2_residuals(scheme, x) for x in h])
    lower = slice(0, max(2, (h.size + 1) // 2))
    return (_loglog_slope(h[lower], res[lower, 0]), _loglog_slope(h[lower], res[lower, 1]))


def satisfies_assumption2(orders, slack=0.1):
    order_A, order_b = orders
    return order_A >= 2.0 - slack and order_b >= 1.0 - slack


def discriminant_expansion_check(scheme, h_grid):
    """``sup_h |(tr A)^2 - 4 det A - (nu^2 - 4) h^2| / h^3`` over ``h_grid``."""
    nu = scheme.nu
    worst = 0.0
    for h in np.asarray(h_grid, dtype=float):
        sp = spectrum(scheme.A(h))
        worst = max(worst, abs(sp.disc - (nu * nu - 4.0) * h * h) / h ** 3)
    return worst


def find_instability_witness(theta, trials=1000, seed=0,
                             h_range=(1e-3, 10.0), nu_range=(2.0, 1e3)):
    """Random search for ``(h, nu)`` where the theta-method is unstable.

    Returns ``(h, nu)`` or ``None`` if every trial was stable.
    """
    rng = np.random.default_rng(seed)
    lh = np.log(h_range)
    lnu = np.log(nu_range)
    for _ in range(trials):
        h = float(np.exp(rng.uniform(*lh)))
        nu = float(np.exp(rng.uniform(*lnu)))
        if not stability(theta_method(theta, nu), h).stable:
            return h, nu
    return None
