"""Confining potentials with growth certificates.

A potential ``V`` carries a certificate ``(eta, alpha, L0)`` asserting
``V(q) >= eta * |q|**alpha`` for ``|q| >= L0``.  The certificate drives the
truncation radius of every quadrature in :mod:`langevin_ldp.gibbs`, so it is
machine-checked on a logarithmic grid rather than trusted blindly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import ConfigurationError, EvaluationError

__all__ = [
    "GrowthCertificate",
    "Potential",
    "builtin_potential",
    "BUILTIN_KINDS",
    "check_growth",
    "check_gradient",
    "locate_infimum",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class GrowthCertificate(NamedTuple):
    eta: float
    alpha: float
    L0: float


@dataclass(frozen=True)
class Potential:
    """A one-dimensional confining potential.

    Parameters
    ----------
    name : str
        Identifier, echoed into experiment outputs.
    value_fn, grad_fn : callable
        ``q -> V(q)`` and ``q -> V'(q)``.  Builtins accept scalars and arrays.
    growth : GrowthCertificate
        User-asserted lower growth bound, see :func:`check_growth`.
    infimum_hint : tuple of float, optional
        Known ``(q*, V*)``.
    params : dict, optional
        Numeric parameters the potential was built from.
    """

    name: str
    value_fn: Callable
    grad_fn: Callable
    growth: GrowthCertificate
    infimum_hint: Optional[tuple] = None
    params: Optional[dict] = None

    def __post_init__(self):
        eta, alpha, L0 = self.growth
        if not (eta > 0 and alpha > 0 and L0 >= 1):
            raise ConfigurationError(
                f"invalid growth certificate {tuple(self.growth)}: need eta>0, alpha>0, L0>=1")
        object.__setattr__(self, "growth", GrowthCertificate(float(eta), float(alpha), float(L0)))

    def __call__(self, q):
        return self.value_fn(q)

    def grad(self, q):
        return self.grad_fn(q)

    def values(self, q):
        """Evaluate on an array, falling back to a Python loop for scalar-only callables."""
        q = np.asarray(q, dtype=float)
        try:
            v = np.asarray(self.value_fn(q), dtype=float)
            if v.shape == q.shape:
                return v
        except (TypeError, ValueError):
            pass
        return np.array([float(self.value_fn(float(x))) for x in q.ravel()]).reshape(q.shape)

    def minimizer_bound(self):
        """Radius guaranteed to contain every global minimizer."""
        eta, alpha, L0 = self.growth
        v0 = float(self.value_fn(0.0))
        if v0 <= 0:
            return L0
        return max(L0, (v0 / eta) ** (1.0 / alpha))


# -- builtins ---------------------------------------------------------------

def _quadratic(stiffness=1.0):
    k = float(stiffness)
    if not k > 0:
        raise ConfigurationError("quadratic: stiffness must be positive")
    return Potential(
        name="quadratic",
        value_fn=lambda q: 0.5 * k * q * q,
        grad_fn=lambda q: k * q,
        growth=GrowthCertificate(0.5 * k, 2.0, 1.0),
        infimum_hint=(0.0, 0.0),
        params={"stiffness": k},
    )


def _quartic(scale=1.0):
    c = float(scale)
    if not c > 0:
        raise ConfigurationError("quartic: scale must be positive")
    return Potential(
        name="quartic",
        value_fn=lambda q: c * q ** 4,
        grad_fn=lambda q: 4.0 * c * q ** 3,
        growth=GrowthCertificate(c, 4.0, 1.0),
        infimum_hint=(0.0, 0.0),
        params={"scale": c},
    )


def _double_well(well=1.0):
    a = float(well)
    if not (math.isfinite(a) and a > 0):
        raise ConfigurationError("double_well: well position must be finite and positive")
    a2 = a * a
    # (q^2 - a^2)^2 >= q^4 / 2  iff  q^2 >= (2 + sqrt 2) a^2
    L0 = max(1.0, a * math.sqrt(2.0 + math.sqrt(2.0)))
    return Potential(
        name="double_well",
        value_fn=lambda q: (q * q - a2) ** 2,
        grad_fn=lambda q: 4.0 * q * (q * q - a2),
        growth=GrowthCertificate(0.5, 4.0, L0),
        infimum_hint=(-a, 0.0),
        params={"well": a},
    )


def _shifted_quartic(offset=1.0):
    c = float(offset)
    if not math.isfinite(c):
        raise ConfigurationError("shifted_quartic: offset must be finite")
    if c >= 0:
        cert = GrowthCertificate(1.0, 4.0, 1.0)
    else:
        cert = GrowthCertificate(0.5, 4.0, max(1.0, (-2.0 * c) ** 0.25))
    return Potential(
        name="shifted_quartic",
        value_fn=lambda q: q ** 4 + c,
        grad_fn=lambda q: 4.0 * q ** 3,
        growth=cert,
        infimum_hint=(0.0, c),
        params={"offset": c},
    )


_BUILDERS = {
    "quadratic": _quadratic,
    "quartic": _quartic,
    "double_well": _double_well,
    "shifted_quartic": _shifted_quartic,
}
BUILTIN_KINDS = tuple(_BUILDERS)


def builtin_potential(kind, **params):
    """Construct one of the builtin potentials.

    ==================  =======================  ==============
    kind                V(q)                     parameters
    ==================  =======================  ==============
    quadratic           k q^2 / 2                stiffness=1
    quartic             c q^4                    scale=1
    double_well         (q^2 - a^2)^2            well=1
    shifted_quartic     q^4 + c                  offset=1
    ==================  =======================  ==============
    """
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ConfigurationError(
            f"unknown potential kind {kind!r}; expected one of {', '.join(BUILTIN_KINDS)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigurationError(f"{kind}: {exc}") from None


# -- validation -------------------------------------------------------------

def check_growth(potential, n=2000, decades=3.0, rel_slack=1e-12):
    """Check the growth certificate on a log grid of ``[L0, L0 * 10**decades]``.

    Both tails are sampled.  Returns ``True`` when ``V(q) >= eta |q|^alpha``
    holds at every sample (up to ``rel_slack`` for rounding).
    """
    eta, alpha, L0 = potential.growth
    r = np.geomspace(L0, L0 * 10.0 ** decades, n)
    bound = eta * r ** alpha
    for q in (r, -r):
        v = potential.values(q)
        if not np.all(np.isfinite(v)):
            raise EvaluationError(f"{potential.name}: non-finite value on the growth grid")
        if np.any(v < bound * (1.0 - rel_slack)):
            return False
    return True


def check_gradient(potential, points=None, step=1e-5):
    """Largest relative mismatch between ``grad_fn`` and central differences.

    The mismatch is measured as ``|fd - g| / max(1, |g|)``.
    """
    if points is None:
        points = np.linspace(-5.0, 5.0, 101)
    q = np.asarray(points, dtype=float)
    fd = (potential.values(q + step) - potential.values(q - step)) / (2.0 * step)
    g = np.array([float(potential.grad_fn(float(x))) for x in q])
    return float(np.max(np.abs(fd - g) / np.maximum(1.0, np.abs(g))))


# -- infimum ----------------------------------------------------------------

def _golden_section(f, a, b, tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _polish_with_gradient(potential, q, lo, hi):
    # Bisection on the sign of V' recovers digits that value comparisons cannot
    # resolve in a flat minimum.
    g = potential.grad_fn
    glo, ghi = float(g(lo)), float(g(hi))
    if not (glo < 0.0 < ghi):
        return q
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        gm = float(g(mid))
        if gm == 0.0:
            return mid
        if gm < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def locate_infimum(potential, search_radius=None, tol=1e-12, n_grid=10_000):
    """Global minimizer of ``V`` by grid scan then golden-section refinement.

    Parameters
    ----------
    potential : Potential
    search_radius : float, optional
        Half-width of the scanned interval; must be at least ``L0``.  It is
        widened if needed so the interval provably contains the minimizer.
    tol : float
        Relative bracket width at which refinement stops.

    Returns
    -------
    (q_star, v_star) : tuple of float
        Among (near-)tied minima the one with the smallest ``q`` is returned.
    """
    eta, alpha, L0 = potential.growth
    if search_radius is None:
        search_radius = L0
    if search_radius < L0:
        raise ConfigurationError(f"search_radius {search_radius} is below L0={L0}")
    if not tol > 0:
        raise ConfigurationError("tol must be positive")
    R = max(float(search_radius), potential.minimizer_bound())
    grid = np.linspace(-R, R, n_grid)
    vals = potential.values(grid)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError(f"{potential.name}: non-finite value while scanning for the infimum")
    vmin = vals.min()
    # candidate wells are discrete local minima; near-ties resolve to smallest q
    padded = np.concatenate([[np.inf], vals, [np.inf]])
    is_min = (vals <= padded[:-2]) & (vals <= padded[2:])
    ties = np.flatnonzero(is_min & (vals <= vmin + 1e-12 * max(1.0, abs(vmin))))
    i = int(ties[0])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n_grid - 1)]

    def f(x):
        return float(potential.value_fn(x))

    q, v = _golden_section(f, lo, hi, tol)
    q = _polish_with_gradient(potential, q, lo, hi)
    v = f(q)
    if v > vals[i]:
        q, v = float(grid[i]), float(vals[i])
    return float(q), float(v)
