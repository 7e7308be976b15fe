"""Limit extrapolation from sampled curves.

All routines are least-squares fits of a short asymptotic expansion to the
tail of a curve, returning the constant term.
"""

import numpy as np

__all__ = ["limit_at_zero", "limit_at_infinity", "laplace_limit"]


def _fit_constant(columns, y):
    X = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[0])


def limit_at_zero(x, y, degree=2, n_points=None):
    """Extrapolate ``y(x)`` to ``x -> 0`` assuming ``y = c0 + c1 x + ... ``.

    Uses the ``n_points`` samples with the smallest ``|x|`` (default
    ``degree + 2``), i.e. the asymptotic end of the grid.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if n_points is None:
        n_points = degree + 2
    n_points = min(n_points, x.size)
    degree = min(degree, n_points - 1)
    idx = np.argsort(np.abs(x))[:n_points]
    xs, ys = x[idx], y[idx]
    # scale for conditioning; the constant term is unaffected
    s = np.max(np.abs(xs))
    return _fit_constant([(xs / s) ** k for k in range(degree + 1)], ys)


def limit_at_infinity(nu, y, degree=2, n_points=None):
    """Extrapolate ``y(nu)`` to ``nu -> inf`` as a polynomial in ``1/nu``."""
    nu = np.asarray(nu, dtype=float)
    return limit_at_zero(1.0 / nu, y, degree=degree, n_points=n_points)


def laplace_limit(nu, y, n_points=None):
    """Extrapolate a Laplace-type curve ``(1/nu) ln int exp(-nu f)``.

    Such curves behave like ``c0 + (c1 ln nu + c2) / nu`` (Gaussian width
    factor), so the fit basis is ``{1, ln(nu)/nu, 1/nu}`` over the upper half
    of the grid.
    """
    nu = np.asarray(nu, dtype=float)
    y = np.asarray(y, dtype=float)
    if n_points is None:
        n_points = max(3, nu.size // 2)
    idx = np.argsort(nu)[-n_points:]
    v, w = nu[idx], y[idx]
    return _fit_constant([np.ones_like(v), np.log(v) / v, 1.0 / v], w)
