"""Rate functions of the numerical invariant measures.

Small-noise limit (``eps -> 0`` at fixed ``nu``, ``h``): the scheme's invariant
law is ``N(0, Sigma)`` with ``Sigma`` linear in ``eps``, so the scaled
log-moment generating function is the quadratic form
``Lambda(t) = t^T Sigma t / (2 eps)`` and the rate is its convex conjugate.

Strong-dissipation limit (``nu -> inf`` at fixed ``eps``, ``h``) for the
theta-method: ``Lambda(y) = lim (nu/2) y^T Sigma(nu) y`` equals
``(eps/4)(y1^2 + y2^2)`` for ``theta = 1/2`` but only ``(eps/4) y2^2`` for
``theta > 1/2``; the conjugate of the latter is infinite off ``{p = 0}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRateError, DomainError, NumericalError, StabilityError
from .extrapolate import limit_at_infinity, limit_at_zero
from .schemes import spectrum, stability, theta_method
from .sets import Annulus, BallComplement, Box
from .stationary import closed_form_sigma

__all__ = [
    "QuadraticRate",
    "ExtendedRate",
    "QuadraticLMGF",
    "PreservationReport",
    "DissipationCurve",
    "lmgf_small_noise",
    "legendre_quadratic",
    "rate_small_noise",
    "preservation_small_noise",
    "dissipation_limit_curve",
    "dissipation_lmgf_matrix",
    "rate_strong_dissipation",
    "preservation_strong_dissipation",
    "rate_infimum_over_set",
    "DEFAULT_POINTS",
    "default_dissipation_grid",
]

DEFAULT_POINTS = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (-2.0, 0.5))
_THETA_TOL = 1e-12


def default_dissipation_grid():
    return np.geomspace(1e1, 1e6, 12)


def _xy(p, q):
    return np.asarray(p, dtype=float), np.asarray(q, dtype=float)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


class QuadraticRate:
    """``x -> x^T R x`` with ``R`` symmetric positive definite."""

    domain_dim = 2

    def __init__(self, R):
        R = np.asarray(R, dtype=float)
        if R.shape != (2, 2) or abs(R[0, 1] - R[1, 0]) > 1e-14 * np.abs(R).max():
            raise DomainError("rate matrix must be symmetric 2x2")
        R = 0.5 * (R + R.T)
        if np.linalg.eigvalsh(R).min() <= 0:
            raise DegenerateRateError(f"rate matrix is not positive definite: {R.tolist()}")
        self.R = R
        self.normals = np.zeros((0, 2))

    def __call__(self, p, q):
        p, q = _xy(p, q)
        R = self.R
        return _scalar(R[0, 0] * p * p + 2.0 * R[0, 1] * p * q + R[1, 1] * q * q)

    def __repr__(self):
        return f"QuadraticRate(R={self.R.tolist()})"


class ExtendedRate:
    """Quadratic form on a linear subspace, ``+inf`` off it.

    The subspace is the common null space of the unit ``normals`` (0, 1 or 2
    rows); membership uses the tolerance ``tol * max(1, |x|)``.
    """

    def __init__(self, R, normals, tol=1e-12):
        self.R = np.asarray(R, dtype=float)
        self.normals = np.asarray(normals, dtype=float).reshape(-1, 2)
        self.tol = tol

    @property
    def domain_dim(self):
        return 2 - self.normals.shape[0]

    def on_domain(self, p, q):
        p, q = _xy(p, q)
        scale = np.maximum(1.0, np.hypot(p, q))
        ok = np.ones(np.broadcast(p, q).shape, dtype=bool)
        for n in self.normals:
            ok &= np.abs(n[0] * p + n[1] * q) <= self.tol * scale
        return ok

    def __call__(self, p, q):
        p, q = _xy(p, q)
        R = self.R
        val = R[0, 0] * p * p + 2.0 * R[0, 1] * p * q + R[1, 1] * q * q
        return _scalar(np.where(self.on_domain(p, q), val, math.inf))

    def __repr__(self):
        return f"ExtendedRate(R={self.R.tolist()}, normals={self.normals.tolist()})"


@dataclass(frozen=True)
class QuadraticLMGF:
    """``t -> t^T M t``."""

    M: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return float(t @ self.M @ t)


def lmgf_small_noise(scheme, h):
    """Limiting scaled log-MGF of the scheme's invariant law as ``eps -> 0``.

    ``M = h / (2 (tr^2 - 4 det)) [[S11, S12], [S12, S22]] = Sigma / (2 eps)``.
    """
    cov = closed_form_sigma(scheme, 1.0, h)
    s11, s22, s12 = cov.components
    disc = cov.extras["disc"]
    M = h / (2.0 * disc) * np.array([[s11, s12], [s12, s22]])
    # finiteness of the log-MGF is what gives exponential tightness
    if not np.all(np.isfinite(M)):
        raise NumericalError("log-moment generating function is not finite")
    return QuadraticLMGF(M)


def legendre_quadratic(M, tol=1e-12):
    """Convex conjugate of ``t -> t^T M t`` for symmetric PSD ``M``.

    Positive definite ``M`` gives ``x -> x^T M^{-1} x / 4``.  A singular ``M``
    gives that form restricted to the range of ``M`` and ``+inf`` elsewhere.
    """
    M = np.asarray(M, dtype=float)
    scale = np.abs(M).max()
    if M.shape != (2, 2) or abs(M[0, 1] - M[1, 0]) > 1e-14 * max(scale, 1e-300):
        raise DomainError("M must be a symmetric 2x2 matrix")
    M = 0.5 * (M + M.T)
    w, U = np.linalg.eigh(M)
    if scale > 0 and w.min() < -tol * scale:
        raise DomainError(f"M is indefinite (eigenvalues {w.tolist()})")
    keep = w > tol * scale if scale > 0 else np.zeros(2, dtype=bool)
    if keep.all():
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[0, 1]
        R = np.array([[M[1, 1], -M[0, 1]], [-M[0, 1], M[0, 0]]]) / (4.0 * det)
        return QuadraticRate(R)
    R = np.zeros((2, 2))
    for wi, ui, k in zip(w, U.T, keep):
        if k:
            R += np.outer(ui, ui) / (4.0 * wi)
    return ExtendedRate(R, U.T[~keep])


def rate_small_noise(scheme, h, check_points=20, seed=0):
    """Small-noise rate ``I^h`` of the scheme's invariant law.

    ``I^h(p, q) = (tr^2 - 4 det)(S22 p^2 + S11 q^2 - 2 S12 p q)
    / (2 h (S11 S22 - S12^2))``.  The result is cross-checked against
    :func:`legendre_quadratic` of :func:`lmgf_small_noise` at random points.
    """
    cov = closed_form_sigma(scheme, 1.0, h)
    s11, s22, s12 = cov.components
    disc = cov.extras["disc"]
    gram = s11 * s22 - s12 * s12
    if gram == 0:
        raise DegenerateRateError(f"S11 S22 - S12^2 vanishes at h={h}")
    c = disc / (2.0 * h * gram)
    R = c * np.array([[s22, -s12], [-s12, s11]])
    try:
        rate = QuadraticRate(R)
    except DegenerateRateError:
        raise DegenerateRateError(f"small-noise rate is not positive definite at h={h}; "
                                  "step size too large") from None
    if check_points:
        conj = legendre_quadratic(lmgf_small_noise(scheme, h).M)
        x = np.random.default_rng(seed).standard_normal((check_points, 2))
        a, b = rate(x[:, 0], x[:, 1]), conj(x[:, 0], x[:, 1])
        if np.max(np.abs(a - b) / np.abs(b)) > 1e-10:
            raise NumericalError("closed-form rate disagrees with the Legendre conjugate")
    return rate


# -- preservation reports ---------------------------------------------------

@dataclass
class PreservationReport:
    kind: str                 # "small_noise" | "strong_dissipation"
    axis: str                 # "h" | "nu"
    points: list
    grid: np.ndarray
    values: np.ndarray        # (n_points, n_grid) rate values along the grid
    targets: np.ndarray
    limits: np.ndarray
    verdict: bool
    order: float
    tol: float
    params: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def rows(self):
        """CSV rows ``(h_or_nu, point_p, point_q, rate_value, target, abs_error)``."""
        out = []
        for (p, q), vals, tgt in zip(self.points, self.values, self.targets):
            for g, v in zip(self.grid, vals):
                out.append((float(g), p, q, float(v), float(tgt), float(abs(v - tgt))))
        return out

    def to_dict(self):
        def clean(x):
            x = float(x)
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
        return {
            "kind": self.kind,
            "axis": self.axis,
            "verdict": bool(self.verdict),
            "tol": self.tol,
            "order": clean(self.order),
            "points": [[p, q] for p, q in self.points],
            "targets": [clean(t) for t in self.targets],
            "limits": [clean(t) for t in self.limits],
            "params": self.params,
            **{k: v for k, v in self.extras.items()},
        }


def _within(limit, target, tol):
    if not (math.isfinite(limit) and math.isfinite(target)):
        return limit == target
    return abs(limit - target) <= tol * abs(target) + 1e-12


def _convergence_order(grid, values, targets):
    slopes = []
    for vals, tgt in zip(values, targets):
        err = np.abs(vals - tgt)
        ok = np.isfinite(err) & (err > 0)
        if ok.sum() >= 2:
            slopes.append(np.polyfit(np.log(grid[ok]), np.log(err[ok]), 1)[0])
    return float(np.median(slopes)) if slopes else math.inf


def preservation_small_noise(scheme, points=DEFAULT_POINTS, h_grid=None, tol=1e-2):
    """Check ``lim_{h->0} I^h(p, q) = nu (p^2 + q^2)`` at ``points``."""
    h = np.asarray(np.geomspace(1e-1, 1e-4, 10) if h_grid is None else h_grid, dtype=float)
    for x in h:
        if not stability(scheme, x).stable:
            raise StabilityError(f"{scheme.name} is unstable at h={x}")
    pts = [(float(p), float(q)) for p, q in points]
    P = np.array([p for p, _ in pts])
    Q = np.array([q for _, q in pts])
    values = np.array([rate_small_noise(scheme, x, check_points=0)(P, Q) for x in h]).T
    targets = scheme.nu * (P * P + Q * Q)
    limits = np.array([limit_at_zero(h, v) for v in values])
    verdict = all(_within(l, t, tol) for l, t in zip(limits, targets))
    return PreservationReport(
        kind="small_noise", axis="h", points=pts, grid=h, values=values, targets=targets,
        limits=limits, verdict=verdict, order=_convergence_order(h, values, targets), tol=tol,
        params={"scheme": scheme.name, "nu": scheme.nu, "theta": scheme.theta})


# -- strong dissipation -----------------------------------------------------

@dataclass(frozen=True)
class DissipationCurve:
    nu: np.ndarray
    values: np.ndarray
    limit: float
    expected: float
    y: tuple


def _check_theta(theta):
    if not (0.5 - _THETA_TOL <= theta <= 1.0 + _THETA_TOL):
        raise DomainError(f"theta={theta} outside [1/2, 1]: no invariant measure guarantee "
                          "for large nu")


def dissipation_lmgf_matrix(theta, eps):
    """Analytic limit matrix ``M`` with ``Lambda(y) = y^T M y`` as ``nu -> inf``."""
    _check_theta(theta)
    midpoint = abs(theta - 0.5) <= _THETA_TOL
    return np.diag([eps / 4.0 if midpoint else 0.0, eps / 4.0])


def dissipation_limit_curve(theta, eps, h, nu_grid=None, y=(1.0, 0.0)):
    """Sample ``(nu/2) y^T Sigma_theta(nu) y`` and extrapolate ``nu -> inf`` in ``1/nu``."""
    _check_theta(theta)
    nu = np.asarray(default_dissipation_grid() if nu_grid is None else nu_grid, dtype=float)
    if np.any(nu <= 2.0):
        raise DomainError("dissipation grid requires nu > 2")
    yv = np.asarray(y, dtype=float)
    vals = np.array([0.5 * n * yv @ closed_form_sigma(theta_method(theta, n), eps, h).sigma @ yv
                     for n in nu])
    limit = limit_at_infinity(nu, vals) if nu.size >= 3 else float(vals[-1])
    expected = float(yv @ dissipation_lmgf_matrix(theta, eps) @ yv)
    return DissipationCurve(nu=nu, values=vals, limit=limit, expected=expected,
                            y=tuple(float(v) for v in yv))


def rate_strong_dissipation(theta, eps, h):
    """Strong-dissipation rate ``J^h`` of the theta-method.

    ``(p^2 + q^2)/eps`` for ``theta = 1/2``; ``q^2/eps`` on ``{p = 0}`` and
    ``+inf`` elsewhere for ``theta in (1/2, 1]``.
    """
    if not (eps > 0 and h > 0):
        raise DomainError("eps and h must be positive")
    return legendre_quadratic(dissipation_lmgf_matrix(theta, eps))


def preservation_strong_dissipation(theta, eps, h, points=DEFAULT_POINTS, tol=1e-2,
                                    nu_grid=None):
    """Check ``J^h(p, q) = (p^2 + q^2)/eps`` and cross-validate the limit matrix.

    The verdict compares ``J^h`` with the continuous rate at ``points``; the
    extrapolated dissipation curves at ``(1,0), (0,1), (1,1)`` are compared with
    the analytic limit matrix and reported as ``lmgf_consistent``.
    """
    rate = rate_strong_dissipation(theta, eps, h)
    pts = [(float(p), float(q)) for p, q in points]
    P = np.array([p for p, _ in pts])
    Q = np.array([q for _, q in pts])
    J = np.atleast_1d(rate(P, Q)).astype(float)
    targets = (P * P + Q * Q) / eps
    verdict = all(_within(j, t, tol) for j, t in zip(J, targets))

    curves = [dissipation_limit_curve(theta, eps, h, nu_grid, y)
              for y in ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0))]
    consistent = all(abs(c.limit - c.expected) <= 1e-3 * eps for c in curves)
    grid = curves[0].nu
    # per-point finite-nu rate of N(0, Sigma(nu)) scaled by 1/nu, for the CSV
    values = np.array([[_finite_nu_rate(theta, eps, h, n, p, q) for n in grid] for p, q in pts])
    return PreservationReport(
        kind="strong_dissipation", axis="nu", points=pts, grid=grid, values=values,
        targets=targets, limits=J, verdict=verdict,
        order=_convergence_order(grid[::-1] ** -1.0, values[:, ::-1], targets), tol=tol,
        params={"theta": theta, "eps": eps, "h": h},
        extras={"lmgf_consistent": consistent,
                "lmgf_limits": [{"y": list(c.y), "extrapolated": c.limit, "expected": c.expected}
                                for c in curves]})


def _finite_nu_rate(theta, eps, h, nu, p, q):
    # conjugate of y -> (nu/2) y^T Sigma y, i.e. x^T Sigma^{-1} x / (2 nu)
    S = closed_form_sigma(theta_method(theta, nu), eps, h).sigma
    x = np.array([p, q])
    return float(x @ np.linalg.solve(S, x)) / (2.0 * nu)


# -- infima over sets -------------------------------------------------------

def _quad_min_on_segment(R, x0, d, t_lo, t_hi):
    # min over t in [t_lo, t_hi] of (x0 + t d)^T R (x0 + t d)
    a = d @ R @ d
    b = 2.0 * (x0 @ R @ d)
    cands = [t_lo, t_hi]
    if a > 0:
        cands.append(min(max(-b / (2.0 * a), t_lo), t_hi))
    return min(float((x0 + t * d) @ R @ (x0 + t * d)) for t in cands)


def _line_box_interval(u, box):
    t_lo, t_hi = -math.inf, math.inf
    for ui, lo, hi in ((u[0], box.p_lo, box.p_hi), (u[1], box.q_lo, box.q_hi)):
        if abs(ui) < 1e-15:
            if not (lo <= 0.0 <= hi):
                return None
            continue
        a, b = sorted((lo / ui, hi / ui))
        t_lo, t_hi = max(t_lo, a), min(t_hi, b)
    return (t_lo, t_hi) if t_lo <= t_hi else None


def rate_infimum_over_set(rate, region):
    """``inf_{x in region} rate(x)`` for quadratic or extended rates."""
    if region.contains_origin():
        return 0.0
    R = rate.R
    dim = rate.domain_dim
    if dim == 0:
        return math.inf
    if dim == 1:
        n = rate.normals[0]
        u = np.array([-n[1], n[0]])
        c = float(u @ R @ u)
        if isinstance(region, Annulus):
            return c * region.r_inner ** 2
        if isinstance(region, BallComplement):
            return c * region.radius ** 2
        iv = _line_box_interval(u, region)
        if iv is None:
            return math.inf
        lo, hi = iv
        return 0.0 if lo <= 0.0 <= hi else c * min(lo * lo, hi * hi)
    if isinstance(region, Annulus):
        return float(region.r_inner ** 2 * np.linalg.eigvalsh(R).min())
    if isinstance(region, BallComplement):
        return float(region.radius ** 2 * np.linalg.eigvalsh(R).min())
    if isinstance(region, Box):
        # convex form, origin outside: the minimum lies on one of the edges
        edges = [
            (np.array([region.p_lo, 0.0]), np.array([0.0, 1.0]), region.q_lo, region.q_hi),
            (np.array([region.p_hi, 0.0]), np.array([0.0, 1.0]), region.q_lo, region.q_hi),
            (np.array([0.0, region.q_lo]), np.array([1.0, 0.0]), region.p_lo, region.p_hi),
            (np.array([0.0, region.q_hi]), np.array([1.0, 0.0]), region.p_lo, region.p_hi),
        ]
        return min(_quad_min_on_segment(R, x0, d, a, b) for x0, d, a, b in edges)
    raise DomainError(f"unsupported set {region!r}")
