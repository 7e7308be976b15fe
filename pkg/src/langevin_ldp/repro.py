"""Bundled recipes with pinned defaults, one per headline limit result.

Each recipe returns a :class:`ReproTable` whose rows carry a ``status``
column; the table passes when every row does.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .gibbs import continuous_rate, laplace_limit_curve
from .ldp import (dissipation_limit_curve, preservation_small_noise,
                  preservation_strong_dissipation)
from .montecarlo import ContinuousGaussian, decay_rate_estimate
from .potentials import builtin_potential
from .schemes import euler_maruyama, find_instability_witness, stability, theta_method
from .sets import BallComplement
from .stationary import closed_form_sigma, lyapunov_sigma, sigma_asymptotics

__all__ = ["ReproTable", "RECIPES", "run_recipe", "SIGMA_GRID"]

SIGMA_GRID = {
    "theta": (0.5, 0.6, 0.75, 0.9, 1.0),
    "nu": (0.5, 1.0, 3.0, 5.0, 10.0, 100.0),
    "h": tuple(np.geomspace(1e-4, 1e-1, 7)),
    "eps": (0.1, 1.0),
}


@dataclass
class ReproTable:
    id: str
    columns: list
    rows: list

    @property
    def passed(self):
        return all(r["status"].startswith("pass") for r in self.rows)

    def format(self):
        cols = self.columns + ["status"]
        cells = [[_fmt(r[c]) for c in cols] for r in self.rows]
        width = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        line = "  ".join(c.ljust(w) for c, w in zip(cols, width))
        out = [self.id, line, "  ".join("-" * w for w in width)]
        out += ["  ".join(v.ljust(w) for v, w in zip(row, width)) for row in cells]
        return "\n".join(out)

    def to_dict(self):
        return {"id": self.id, "passed": self.passed, "columns": self.columns + ["status"],
                "rows": [{k: _plain(v) for k, v in r.items()} for r in self.rows]}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _status(ok):
    return "pass" if ok else "FAIL"


def sigma_schemes(nu):
    for th in SIGMA_GRID["theta"]:
        yield theta_method(th, nu)


def _continuous_rate():
    rows = []
    V = builtin_potential("quadratic")
    rate = continuous_rate("small_noise", 3.0, V)
    rows.append({"check": "nu(p^2+q^2) at (1,1)", "value": rate(1.0, 1.0), "expected": 6.0,
                 "status": _status(abs(rate(1.0, 1.0) - 6.0) < 1e-12)})
    est = decay_rate_estimate(ContinuousGaussian(3.0), np.geomspace(0.05, 0.5, 10),
                              BallComplement(1.0), n_samples=2_000_000, seed=0)
    rows.append({"check": "decay slope, |x|>=1", "value": est.slope, "expected": est.target,
                 "status": _status(est.rel_error <= 0.1)})
    return ReproTable("thm3.3-rate", ["check", "value", "expected"], rows)


def _laplace():
    rows = []
    for kind in ("quadratic", "shifted_quartic", "double_well"):
        c = laplace_limit_curve(builtin_potential(kind))
        ok = abs(c.values[-1] - c.Z0) <= 0.05 and abs(c.extrapolated - c.Z0) <= 5e-3
        rows.append({"potential": kind, "Z0": c.Z0, "value_nu_max": float(c.values[-1]),
                     "extrapolated": c.extrapolated, "status": _status(ok)})
    return ReproTable("lemma3.1-laplace", ["potential", "Z0", "value_nu_max", "extrapolated"], rows)


def _sigma_oracle():
    worst = {}
    for nu, h, eps in itertools.product(SIGMA_GRID["nu"], SIGMA_GRID["h"], SIGMA_GRID["eps"]):
        for s in sigma_schemes(nu):
            a = closed_form_sigma(s, eps, h).sigma
            b = lyapunov_sigma(s, eps, h).sigma
            err = float(np.linalg.norm(a - b) / np.linalg.norm(b))
            worst[s.name] = max(worst.get(s.name, 0.0), err)
    rows = [{"scheme": k, "max_rel_error": v, "status": _status(v <= 1e-10)}
            for k, v in worst.items()]
    return ReproTable("thm4.3-sigma", ["scheme", "max_rel_error"], rows)


def _asymptotics():
    rows = []
    h = np.geomspace(1e-4, 1e-2, 9)
    for nu in (3.0, 5.0, 10.0):
        for s in (euler_maruyama(nu), theta_method(0.5, nu), theta_method(1.0, nu)):
            a = sigma_asymptotics(s, h)
            t = a.expected[0]
            ok = (abs(a.limits[0] - t) <= 1e-3 * abs(t) and abs(a.limits[1] - t) <= 1e-3 * abs(t)
                  and abs(a.limits[2]) <= 1e-6)
            rows.append({"scheme": s.name, "nu": nu, "S11/h": a.limits[0], "S22/h": a.limits[1],
                         "S12/h": a.limits[2], "expected": t, "status": _status(ok)})
    return ReproTable("lemma4.4-asymptotics",
                      ["scheme", "nu", "S11/h", "S22/h", "S12/h", "expected"], rows)


def _small_noise():
    rows = []
    for nu in (1.0, 3.0, 10.0):
        for s in (euler_maruyama(nu), theta_method(0.5, nu), theta_method(1.0, nu)):
            r = preservation_small_noise(s, tol=1e-3)
            err = max(abs(l - t) / abs(t) for l, t in zip(r.limits, r.targets))
            rows.append({"scheme": s.name, "nu": nu, "max_rel_error": err,
                         "status": _status(r.verdict)})
    return ReproTable("thm4.4-preserve", ["scheme", "nu", "max_rel_error"], rows)


def _stability():
    rng = np.random.default_rng(0)
    n = 10_000
    th = rng.uniform(0.5, 1.0, n)
    h = rng.uniform(0.0, 10.0, n)
    h[h == 0.0] = 10.0
    nu = 2.0 + (1e3 - 2.0) * (1.0 - rng.uniform(0.0, 1.0, n))
    unstable = sum(not stability(theta_method(a, c), b).stable for a, b, c in zip(th, h, nu))
    rows = [{"check": "theta in [1/2,1], nu > 2", "value": f"{unstable} unstable of {n}",
             "status": _status(unstable == 0)}]
    w = find_instability_witness(0.25, trials=1000, seed=0)
    rows.append({"check": "witness for theta = 0.25",
                 "value": "none" if w is None else f"h={w[0]:.4g}, nu={w[1]:.4g}",
                 "status": _status(w is not None)})
    return ReproTable("lemma5.2-stability", ["check", "value"], rows)


def _dissipation():
    rows = []
    for th in (0.5, 0.75, 1.0):
        r = preservation_strong_dissipation(th, 1.0, 0.1)
        c = dissipation_limit_curve(th, 1.0, 0.1, y=(1.0, 0.0))
        expected = th == 0.5
        ok = r.verdict == expected and r.extras["lmgf_consistent"]
        label = "preserves" if expected else "fails-to-preserve"
        rows.append({"theta": th, "limit_y10": c.limit, "verdict": r.verdict,
                     "status": ("pass-" if ok else "FAIL-") + label})
    return ReproTable("thm5.3-dissipation", ["theta", "limit_y10", "verdict"], rows)


RECIPES = {
    "thm3.3-rate": _continuous_rate,
    "lemma3.1-laplace": _laplace,
    "thm4.3-sigma": _sigma_oracle,
    "lemma4.4-asymptotics": _asymptotics,
    "thm4.4-preserve": _small_noise,
    "lemma5.2-stability": _stability,
    "thm5.3-dissipation": _dissipation,
}


def run_recipe(recipe_id):
    return RECIPES[recipe_id]()
