"""Planar target sets for rate infima and hit counting.

Each descriptor is closed: boundary points count as members.  ``encode``
packs a descriptor into the ``(code, a, b, c, d)`` row format consumed by the
simulation kernels.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError

__all__ = ["Box", "Annulus", "BallComplement", "parse_set", "encode_sets",
           "BOX", "ANNULUS", "BALL_COMPLEMENT"]

BOX, ANNULUS, BALL_COMPLEMENT = 0, 1, 2


@dataclass(frozen=True)
class Box:
    p_lo: float
    p_hi: float
    q_lo: float
    q_hi: float
    kind = "box"

    def __post_init__(self):
        if not (self.p_lo <= self.p_hi and self.q_lo <= self.q_hi):
            raise DomainError(f"empty box {self}")

    def contains(self, p, q):
        p, q = np.asarray(p), np.asarray(q)
        return (p >= self.p_lo) & (p <= self.p_hi) & (q >= self.q_lo) & (q <= self.q_hi)

    def contains_origin(self):
        return bool(self.contains(0.0, 0.0))

    def encode(self):
        return (BOX, self.p_lo, self.p_hi, self.q_lo, self.q_hi)

    def to_dict(self):
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class Annulus:
    """``r_inner <= |x| <= r_outer`` (``r_outer`` may be ``inf``)."""

    r_inner: float
    r_outer: float
    kind = "annulus"

    def __post_init__(self):
        if not (0.0 <= self.r_inner <= self.r_outer):
            raise DomainError(f"empty annulus {self}")

    def contains(self, p, q):
        r2 = np.asarray(p) ** 2 + np.asarray(q) ** 2
        return (r2 >= self.r_inner ** 2) & (r2 <= self.r_outer ** 2)

    def contains_origin(self):
        return self.r_inner == 0.0

    def encode(self):
        return (ANNULUS, self.r_inner, self.r_outer, 0.0, 0.0)

    def to_dict(self):
        return {"kind": self.kind, **asdict(self)}


@dataclass(frozen=True)
class BallComplement:
    """``|x| >= radius``."""

    radius: float
    kind = "ball_complement"

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise DomainError(f"negative radius {self.radius}")

    def contains(self, p, q):
        return np.asarray(p) ** 2 + np.asarray(q) ** 2 >= self.radius ** 2

    def contains_origin(self):
        return self.radius == 0.0

    def encode(self):
        return (BALL_COMPLEMENT, self.radius, 0.0, 0.0, 0.0)

    def to_dict(self):
        return {"kind": self.kind, **asdict(self)}


_KINDS = {"box": Box, "annulus": Annulus, "ball_complement": BallComplement}


def parse_set(desc):
    """Build a descriptor from a mapping such as ``{"kind": "ball_complement", "radius": 1}``."""
    if isinstance(desc, (Box, Annulus, BallComplement)):
        return desc
    try:
        d = dict(desc)
        cls = _KINDS[d.pop("kind")]
        return cls(**{k: float(v) for k, v in d.items()})
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed set descriptor {desc!r}: {exc}") from None


def encode_sets(sets):
    if not sets:
        return np.zeros((0, 5))
    return np.array([s.encode() for s in sets], dtype=float)
