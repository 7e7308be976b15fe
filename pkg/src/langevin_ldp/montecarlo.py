"""Trajectory simulation and empirical large-deviation checks.

Noise is drawn from a Philox generator keyed by ``(seed, chain_index)``, so a
chain's sample stream never depends on how chains are scheduled.  Chains are
merged in index order, which makes multi-threaded runs bit-identical to
single-threaded ones.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import (ConfigurationError, DivergenceError, DomainError,
                     InsufficientResolutionError, StabilityError)
from .ldp import QuadraticRate, rate_infimum_over_set, rate_small_noise, rate_strong_dissipation
from .schemes import LinearScheme, stability, theta_method
from .sets import encode_sets, parse_set
from .stationary import StationaryCovariance, closed_form_sigma

__all__ = [
    "SimulationConfig",
    "SetHits",
    "EmpiricalSummary",
    "ContinuousGaussian",
    "DecayEstimate",
    "default_burn_in",
    "chain_generator",
    "simulate_chain",
    "run_chains",
    "stationary_draws",
    "exact_stationary_sample",
    "decay_rate_estimate",
    "wilson_interval",
]

BLOCK = 1 << 16
_Z95 = 1.959963984540054
_MASK = (1 << 64) - 1


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def chain_generator(seed, chain_index=0):
    """Philox generator keyed by a 64-bit hash of ``(seed, chain_index)``."""
    if not (0 <= seed <= _MASK and chain_index >= 0):
        raise ConfigurationError("seed must be a 64-bit unsigned integer and chain_index >= 0")
    key = _splitmix64(int(seed) ^ _splitmix64(int(chain_index)))
    return np.random.Generator(np.random.Philox(key=[key, int(chain_index)]))


def default_burn_in(nu, h):
    return int(math.ceil(20.0 / (h * min(nu, 1.0))))


def wilson_interval(k, n, z=_Z95):
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    phat = k / n
    den = 1.0 + z * z / n
    centre = (phat + z * z / (2.0 * n)) / den
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class SimulationConfig:
    """Parameters of a (multi-chain) trajectory run.

    ``n_steps`` counts every step of a chain, burn-in included, so each chain
    contributes ``n_steps - burn_in`` samples.  ``burn_in=None`` selects
    :func:`default_burn_in`.
    """

    scheme: LinearScheme
    eps: float
    h: float
    n_steps: int
    burn_in: int | None = None
    n_chains: int = 1
    seed: int = 0
    init: tuple = (0.0, 0.0)
    target_sets: tuple = ()
    check_stability: bool = True

    def __post_init__(self):
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", default_burn_in(self.scheme.nu, self.h))
        object.__setattr__(self, "target_sets", tuple(parse_set(s) for s in self.target_sets))
        object.__setattr__(self, "init", tuple(float(x) for x in self.init))
        if not (self.h > 0 and self.eps >= 0):
            raise ConfigurationError("need h > 0 and eps >= 0")
        if not (0 <= self.burn_in < self.n_steps):
            raise ConfigurationError(f"need 0 <= burn_in ({self.burn_in}) < n_steps ({self.n_steps})")
        if self.n_chains < 1:
            raise ConfigurationError("n_chains must be at least 1")
        if self.check_stability and not stability(self.scheme, self.h).stable:
            raise StabilityError(f"{self.scheme.name} is unstable at h={self.h}")

    def to_dict(self):
        return {"scheme": self.scheme.name, "nu": self.scheme.nu, "theta": self.scheme.theta,
                "eps": self.eps, "h": self.h, "n_steps": self.n_steps, "burn_in": self.burn_in,
                "n_chains": self.n_chains, "seed": self.seed, "init": list(self.init),
                "target_sets": [s.to_dict() for s in self.target_sets]}


@dataclass(frozen=True)
class SetHits:
    region: object
    hits: int
    n: int

    @property
    def p_hat(self):
        return self.hits / self.n if self.n else 0.0

    @property
    def ci(self):
        return wilson_interval(self.hits, self.n)

    def to_dict(self):
        lo, hi = self.ci
        return {"set": self.region.to_dict(), "hits": self.hits, "n": self.n,
                "p_hat": self.p_hat, "ci_low": lo, "ci_high": hi}


@dataclass(frozen=True)
class EmpiricalSummary:
    """Streaming mean, covariance and set-hit counts.

    ``m2`` holds the centred second-moment sums ``(pp, pq, qq)`` so that
    summaries merge exactly (Chan et al. parallel update).
    """

    n_samples: int
    mean: np.ndarray
    m2: np.ndarray
    hits: tuple = ()
    regions: tuple = ()
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def covariance(self):
        n = self.n_samples
        if n < 2:
            return np.zeros((2, 2))
        spp, spq, sqq = self.m2
        return np.array([[spp, spq], [spq, sqq]]) / (n - 1)

    @property
    def set_hits(self):
        return [SetHits(r, int(k), self.n_samples) for r, k in zip(self.regions, self.hits)]

    def merge(self, other):
        if self.regions != other.regions:
            raise ConfigurationError("cannot merge summaries over different target sets")
        na, nb = self.n_samples, other.n_samples
        if nb == 0:
            return self
        if na == 0:
            return other
        n = na + nb
        d = other.mean - self.mean
        mean = self.mean + d * (nb / n)
        w = na * nb / n
        m2 = self.m2 + other.m2 + w * np.array([d[0] * d[0], d[0] * d[1], d[1] * d[1]])
        hits = tuple(a + b for a, b in zip(self.hits, other.hits))
        return EmpiricalSummary(n, mean, m2, hits, self.regions)

    def to_dict(self):
        return {"n_samples": self.n_samples, "mean": self.mean.tolist(),
                "covariance": self.covariance.tolist(),
                "set_hits": [s.to_dict() for s in self.set_hits]}


def _coefficients(config):
    A, b = config.scheme.coefficients(config.h)
    c = math.sqrt(config.eps * config.h) * np.asarray(b, dtype=float)
    return np.array([A[0, 0], A[0, 1], A[1, 0], A[1, 1], c[0], c[1]])


def simulate_chain(config, chain_index=0, block=BLOCK):
    """Run one chain and return its post-burn-in :class:`EmpiricalSummary`.

    Raises
    ------
    DivergenceError
        If ``|state|`` exceeds ``1e100``; the offending step index is attached.
    """
    coef = _coefficients(config)
    state = np.array(config.init, dtype=float)
    stats = np.zeros(6)
    sets = np.ascontiguousarray(encode_sets(config.target_sets), dtype=float)
    hits = np.zeros(len(config.target_sets), dtype=np.int64)
    rng = chain_generator(config.seed, chain_index)
    step = 0
    while step < config.n_steps:
        m = min(block, config.n_steps - step)
        z = rng.standard_normal(m)
        bad = kernels.run_block(coef, state, z, step, config.burn_in, stats, sets, hits)
        if bad >= 0:
            raise DivergenceError(
                f"{config.scheme.name} diverged at step {bad} (|state| > 1e100); "
                f"the scheme is unstable at h={config.h}", bad)
        step += m
    return EmpiricalSummary(int(stats[0]), stats[1:3].copy(), stats[3:6].copy(),
                            tuple(int(k) for k in hits), config.target_sets,
                            extras={"final_state": state.tolist(), "chain_index": chain_index})


def run_chains(config, threads=None):
    """Simulate ``config.n_chains`` chains and merge them in chain order.

    Returns ``(merged, per_chain)``.  The result does not depend on
    ``threads``.
    """
    if threads is not None and threads < 1:
        raise ConfigurationError("threads must be at least 1")
    idx = range(config.n_chains)
    if threads == 1 or config.n_chains == 1:
        parts = [simulate_chain(config, i) for i in idx]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda i: simulate_chain(config, i), idx))
    merged = parts[0]
    for s in parts[1:]:
        merged = merged.merge(s)
    return merged, parts


# -- exact stationary sampling ----------------------------------------------

def _sym_sqrt(sigma):
    S = np.asarray(sigma.sigma if isinstance(sigma, StationaryCovariance) else sigma, dtype=float)
    if S.shape != (2, 2) or not np.allclose(S, S.T, rtol=1e-12, atol=0):
        raise DomainError("covariance must be a symmetric 2x2 matrix")
    w, U = np.linalg.eigh(0.5 * (S + S.T))
    scale = max(abs(w).max(), 1e-300)
    if w.min() < -1e-12 * scale:
        raise DomainError(f"covariance is not positive semidefinite (eigenvalues {w.tolist()})")
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.T


def stationary_draws(sigma, n, seed=0):
    """``n`` independent draws from ``N(0, sigma)`` as an ``(n, 2)`` array."""
    root = _sym_sqrt(sigma)
    z = chain_generator(seed).standard_normal((n, 2))
    return z @ root


def exact_stationary_sample(sigma, n, seed=0, sets=(), block=1 << 20):
    """Summary of ``n`` exact draws from the invariant Gaussian.

    Draws are produced in blocks so memory stays bounded for large ``n``.
    """
    root = _sym_sqrt(sigma)
    regions = tuple(parse_set(s) for s in sets)
    rng = chain_generator(seed)
    total = EmpiricalSummary(0, np.zeros(2), np.zeros(3), tuple(0 for _ in regions), regions)
    done = 0
    while done < n:
        m = min(block, n - done)
        x = rng.standard_normal((m, 2)) @ root
        mean = x.mean(axis=0)
        d = x - mean
        m2 = np.array([d[:, 0] @ d[:, 0], d[:, 0] @ d[:, 1], d[:, 1] @ d[:, 1]])
        hits = tuple(int(np.count_nonzero(r.contains(x[:, 0], x[:, 1]))) for r in regions)
        total = total.merge(EmpiricalSummary(m, mean, m2, hits, regions))
        done += m
    return total


# -- decay-rate regression --------------------------------------------------

@dataclass(frozen=True)
class ContinuousGaussian:
    """Invariant law of the continuous dynamics with ``V(q) = k q^2 / 2``.

    It is ``N(0, diag(eps / (2 nu), eps / (2 nu k)))`` and its small-noise rate
    is ``nu (p^2 + k q^2)``.
    """

    nu: float
    stiffness: float = 1.0

    def sigma(self, eps):
        s = eps / (2.0 * self.nu)
        return np.diag([s, s / self.stiffness])

    def rate(self):
        return QuadraticRate(np.diag([self.nu, self.nu * self.stiffness]))


@dataclass
class DecayEstimate:
    axis: str
    slope: float
    intercept: float
    target: float
    table: list
    skipped: list

    @property
    def rel_error(self):
        if self.target == 0:
            return abs(self.slope)
        return abs(self.slope - self.target) / abs(self.target)

    def rows(self):
        """CSV rows ``(axis_value, p_hat, ci_low, ci_high, log_p_scaled)``."""
        return [(r["axis_value"], r["p_hat"], r["ci_low"], r["ci_high"], r["log_p_scaled"])
                for r in self.table]

    def to_dict(self):
        return {"axis": self.axis, "slope": self.slope, "target": self.target,
                "rel_error": self.rel_error, "intercept": self.intercept,
                "skipped": self.skipped}


def decay_rate_estimate(source, grid, region, axis="eps", n_samples=10**6, seed=0,
                        h=None, eps=None, mode="exact", config=None):
    """Regress ``ln P(X in region)`` on ``1/eps`` (or on ``nu``).

    Parameters
    ----------
    source : ContinuousGaussian or LinearScheme
        Exact Gaussian law of the continuous dynamics, or a linear scheme whose
        invariant law is computed at step ``h``.
    grid : array_like
        ``eps`` values (``axis="eps"``) or ``nu`` values (``axis="nu"``; the
        source must then be a theta-method scheme and ``eps`` fixed).
    region : set descriptor
    mode : {"exact", "trajectory"}
        Sample the invariant Gaussian directly, or run :func:`simulate_chain`
        with ``config`` as a template (``eps``, ``scheme``, ``target_sets``
        replaced per grid value).

    Returns
    -------
    DecayEstimate
        Hit-weighted least-squares slope, the analytic target ``-inf_A I`` and
        the per-point table.  Grid values with zero hits are skipped.
    """
    region = parse_set(region)
    grid = np.asarray(grid, dtype=float)
    if axis not in ("eps", "nu"):
        raise ConfigurationError("axis must be 'eps' or 'nu'")
    if grid.size < 2 or not np.all(grid > 0):
        raise ConfigurationError("grid needs at least two positive values")
    if mode not in ("exact", "trajectory"):
        raise ConfigurationError("mode must be 'exact' or 'trajectory'")
    continuous = isinstance(source, ContinuousGaussian)
    if not continuous and h is None:
        raise ConfigurationError("a scheme source needs the step size h")
    if continuous and mode == "trajectory":
        raise ConfigurationError("trajectory mode needs a scheme source")
    if axis == "nu" and (continuous or source.theta is None or eps is None):
        raise ConfigurationError("the nu axis needs a theta-method scheme and a fixed eps")

    if axis == "eps":
        rate = source.rate() if continuous else rate_small_noise(source, h, check_points=0)
    else:
        rate = rate_strong_dissipation(source.theta, eps, h)
    target = -rate_infimum_over_set(rate, region)

    table, skipped = [], []
    for i, g in enumerate(grid):
        if axis == "eps":
            e, scheme = float(g), source
        else:
            e, scheme = float(eps), theta_method(source.theta, float(g))
        if mode == "exact":
            cov = source.sigma(e) if continuous else closed_form_sigma(scheme, e, h)
            s = exact_stationary_sample(cov, n_samples, seed=seed + i, sets=(region,))
        else:
            if config is None:
                raise ConfigurationError("trajectory mode needs a SimulationConfig template")
            cfg = replace(config, scheme=scheme, eps=e, h=h, target_sets=(region,),
                          burn_in=None if config.scheme is not scheme else config.burn_in,
                          seed=config.seed + i)
            s, _ = run_chains(cfg, threads=1)
        k, n = s.hits[0], s.n_samples
        lo, hi = wilson_interval(k, n)
        ph = k / n
        x = 1.0 / e if axis == "eps" else float(g)
        scaled = (e * math.log(ph) if axis == "eps" else math.log(ph) / float(g)) if k else -math.inf
        table.append({"axis_value": float(g), "p_hat": ph, "ci_low": lo, "ci_high": hi,
                      "log_p_scaled": scaled, "hits": k, "n": n, "x": x})
        if k == 0:
            skipped.append(float(g))

    used = [r for r in table if r["hits"] > 0]
    if not used:
        raise InsufficientResolutionError(
            "no grid value produced a hit; use larger eps, a smaller set, or more samples")
    if len(used) < 2:
        raise InsufficientResolutionError(
            f"only one grid value ({used[0]['axis_value']}) produced hits; a slope needs two")
    x = np.array([r["x"] for r in used])
    y = np.log([r["p_hat"] for r in used])
    w = np.array([r["hits"] for r in used], dtype=float)
    X = np.column_stack([x, np.ones_like(x)])
    sw = np.sqrt(w)
    (slope, intercept), *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    return DecayEstimate(axis=axis, slope=float(slope), intercept=float(intercept),
                         target=float(target), table=table, skipped=skipped)
