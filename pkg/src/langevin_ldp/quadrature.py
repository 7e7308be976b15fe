"""Adaptive Simpson quadrature with interval bisection."""

from __future__ import annotations

import math

import numpy as np

from .errors import QuadratureError

__all__ = ["adaptive_simpson"]


def _simpson_panels(f, edges):
    panels = []
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        m = 0.5 * (a + b)
        fa, fm, fb = f(a), f(m), f(b)
        s = (b - a) * (fa + 4.0 * fm + fb) / 6.0
        panels.append((a, b, fa, fm, fb, s))
        total += s
    return panels, total


_ROUNDOFF = 64.0 * np.finfo(float).eps


def _refine(f, panels, tol, span, max_depth, max_evals, noise_rel):
    value = 0.0
    err = 0.0
    failed = False
    evals = 0
    for a, b, fa, fm, fb, whole in panels:
        stack = [(a, b, fa, fm, fb, whole, tol * (b - a) / span, 0)]
        while stack:
            a, b, fa, fm, fb, whole, eps, depth = stack.pop()
            m = 0.5 * (a + b)
            lm = 0.5 * (a + m)
            rm = 0.5 * (m + b)
            flm, frm = f(lm), f(rm)
            evals += 2
            if evals > max_evals:
                raise QuadratureError(f"adaptive Simpson exceeded {max_evals} evaluations", err)
            left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
            right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
            delta = left + right - whole
            # below the roundoff floor further bisection cannot reduce delta
            noise = noise_rel * (abs(left) + abs(right))
            converged = abs(delta) <= max(15.0 * eps, noise)
            if converged or depth >= max_depth or m <= a or m >= b:
                if not converged:
                    failed = True
                value += left + right + delta / 15.0
                err += abs(delta) / 15.0
            else:
                stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
                stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
    return value, err, failed


def adaptive_simpson(f, a, b, rel_tol=1e-10, abs_tol=0.0, max_depth=60,
                     breakpoints=(), initial_panels=64, max_evals=2_000_000, noise_rel=0.0):
    """Integrate a scalar function over ``[a, b]``.

    The interval is first split into ``initial_panels`` equal panels plus any
    ``breakpoints`` inside it (put sharp peaks there so they cannot be
    stepped over), then each panel is bisected until the Simpson/Richardson
    error estimate meets its share of the tolerance.

    ``noise_rel`` declares the relative accuracy to which ``f`` itself can be
    evaluated; bisection stops once the Simpson correction falls below it.

    Returns
    -------
    value, error : float
        Integral estimate and its estimated absolute error.

    Raises
    ------
    QuadratureError
        If ``max_depth`` bisections or ``max_evals`` integrand evaluations
        do not reach the tolerance.
    """
    if not b > a:
        raise ValueError("need b > a")
    edges = np.linspace(a, b, initial_panels + 1)
    extra = [float(x) for x in breakpoints if a < x < b]
    if extra:
        edges = np.unique(np.concatenate([edges, extra]))
    edges = [float(x) for x in edges]

    def g(x):
        y = f(x)
        if not math.isfinite(y):
            raise QuadratureError(f"integrand is not finite at x={x!r}", math.inf)
        return y

    panels, coarse = _simpson_panels(g, edges)
    span = b - a
    scale = abs(coarse)
    value = err = 0.0
    failed = False
    # The tolerance depends on the (unknown) integral; re-run if the coarse
    # estimate turned out to be badly off.
    for _ in range(4):
        tol = max(abs_tol, rel_tol * scale)
        if tol == 0.0:
            tol = rel_tol
        value, err, failed = _refine(g, panels, tol, span, max_depth, max_evals,
                                      max(noise_rel, _ROUNDOFF))
        if abs(value) >= 0.5 * scale or tol == abs_tol:
            break
        scale = abs(value)
    if failed and err > max(abs_tol, max(rel_tol, noise_rel) * abs(value)):
        raise QuadratureError("adaptive Simpson hit the maximum bisection depth", err)
    return value, err
