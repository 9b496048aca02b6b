"""Pathloss point processes of the two tiers.

Distances ``r`` map to pathloss values ``r**alpha``; the image of a PPP under
this map is again Poisson on (0, inf).  For the mmWave tier the exponent is
``alpha_l`` for LOS links (probability ``omega`` inside the LOS ball of
radius ``mu``) and ``alpha_n`` otherwise, which produces a three-branch
intensity with breakpoints ``mu**alpha_l`` and ``mu**alpha_n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_SPEC, QuadratureSpec, integrate
from .params import SystemParams

__all__ = [
    "Tier",
    "PathlossTier",
    "intensity",
    "ccdf",
    "pdf",
    "integrate_pathloss",
]


class Tier(enum.Enum):
    MCELL = "mcell"
    SCELL = "scell"


def _as_array(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _out(x, scalar):
    return float(x) if scalar else x


@dataclass(frozen=True)
class PathlossTier:
    tier: Tier
    params: SystemParams

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Pathloss values where the Scell evaluators switch branch."""
        if self.tier is Tier.MCELL:
            return ()
        p = self.params
        b1, b2 = p.mu ** p.alpha_l, p.mu ** p.alpha_n
        return (b1,) if b1 == b2 else (b1, b2)

    @property
    def scale(self) -> float:
        """Pathloss at which the mean count of BSs reaches one (NLOS law for Scells)."""
        p = self.params
        if self.tier is Tier.MCELL:
            return (1.0 / (math.pi * p.lambda_m)) ** (p.alpha_m / 2.0)
        if p.lambda_s == 0:
            return math.inf
        return (1.0 / (math.pi * p.lambda_s)) ** (p.alpha_n / 2.0)

    def intensity(self, t):
        """Mean number of BSs with pathloss below ``t``."""
        t, scalar = _as_array(t)
        if np.any(t < 0) or np.any(np.isnan(t)):
            raise ValueError("pathloss must be non-negative")
        p = self.params
        with np.errstate(over="ignore"):
            if self.tier is Tier.MCELL:
                out = math.pi * p.lambda_m * t ** (2.0 / p.alpha_m)
            else:
                b1, b2 = p.mu ** p.alpha_l, p.mu ** p.alpha_n
                nlos = t ** (2.0 / p.alpha_n)
                inner = p.omega * t ** (2.0 / p.alpha_l) + (1.0 - p.omega) * nlos
                middle = p.omega * p.mu ** 2 + (1.0 - p.omega) * nlos
                out = math.pi * p.lambda_s * np.where(
                    t < b1, inner, np.where(t <= b2, middle, nlos))
        return _out(out, scalar)

    def ccdf(self, t):
        """P(minimum pathloss of the tier exceeds ``t``)."""
        return _out(np.exp(-np.asarray(self.intensity(t))), np.ndim(t) == 0)

    def pdf(self, t):
        """Density of the minimum pathloss, ``-d ccdf / dt``."""
        t, scalar = _as_array(t)
        if np.any(t <= 0) or np.any(np.isnan(t)):
            raise ValueError("pathloss density needs t > 0")
        p = self.params
        lam = np.asarray(self.intensity(t))
        with np.errstate(over="ignore", invalid="ignore"):
            if self.tier is Tier.MCELL:
                # Decaying exponent: the density must integrate to one.
                d = 2.0 / p.alpha_m
                rate = math.pi * p.lambda_m * d * t ** (d - 1.0)
            else:
                b1, b2 = p.mu ** p.alpha_l, p.mu ** p.alpha_n
                dl, dn = 2.0 / p.alpha_l, 2.0 / p.alpha_n
                nlos = dn * t ** (dn - 1.0)
                inner = p.omega * dl * t ** (dl - 1.0) + (1.0 - p.omega) * nlos
                rate = math.pi * p.lambda_s * np.where(
                    t < b1, inner, np.where(t <= b2, (1.0 - p.omega) * nlos, nlos))
            out = np.where(lam == np.inf, 0.0, rate * np.exp(-lam))
        return _out(out, scalar)


def intensity(tier: PathlossTier, t):
    return tier.intensity(t)


def ccdf(tier: PathlossTier, t):
    return tier.ccdf(t)


def pdf(tier: PathlossTier, t):
    return tier.pdf(t)


_LOG_RANGE = 650.0


def integrate_pathloss(g, points=(), spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integrate ``g(l) dl`` over l in (0, inf) on a logarithmic grid.

    With ``l = exp(x)`` the integrands of this package (power laws times
    stretched exponentials) become smooth bell shapes in ``x``, so the
    adaptive rule needs a handful of panels.  ``points`` are pathloss values
    to split at (branch breakpoints, characteristic scales).
    """
    def h(x):
        # Keep l and its rescalings (l / a, a l) inside the normal double
        # range; every integrand here vanishes long before these limits.
        xs = np.clip(x, -_LOG_RANGE, _LOG_RANGE)
        l = np.exp(xs)
        with np.errstate(over="ignore", under="ignore"):
            val = g(l) * l
        return np.where(np.abs(x) > _LOG_RANGE, 0.0, val)

    logs = [math.log(p) for p in points if p > 0 and math.isfinite(p)]
    if not logs:
        logs = [0.0]
    return integrate(h, -math.inf, math.inf, spec, points=logs)
