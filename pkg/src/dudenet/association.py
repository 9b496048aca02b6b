"""Analytic association probabilities for the typical UE.

Two criteria are covered: maximum biased received power (Max-BRP), which
only compares minimum pathlosses through the weight ratio ``a_c``, and
maximum unit-load rate (Max-Rate), which compares the sub-6GHz SIR against
the mmWave SNR after mapping both through their bandwidths.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .numerics import DEFAULT_SPEC, OUTER_SPEC, QuadratureSpec, integrate, q_function, rho
from .params import SystemParams, derive
from .pathloss import PathlossTier, Tier, integrate_pathloss

__all__ = [
    "Direction",
    "Criterion",
    "AssocQuery",
    "AssocResult",
    "weight_ratio",
    "association",
    "assoc_brp",
    "assoc_brp_closed",
    "snr_scale",
    "snr_ccdf_mmwave",
    "snr_pdf_mmwave",
    "assoc_rate",
    "decoupling_gain",
]


class Direction(enum.Enum):
    UL = "ul"
    DL = "dl"


class Criterion(enum.Enum):
    MAX_BRP = "max_brp"
    MAX_RATE = "max_rate"


@dataclass(frozen=True)
class AssocQuery:
    direction: Direction
    criterion: Criterion = Criterion.MAX_BRP


@dataclass(frozen=True)
class AssocResult:
    p_mcell: float
    p_scell: float
    source: str  # "quadrature" | "closed_form" | "monte_carlo"
    ci_halfwidth: float = 0.0


def weight_ratio(direction: Direction, params: SystemParams) -> float:
    """``a_c``: the UE picks the Scell tier iff L_min,s <= a_c * L_min,m."""
    dc = derive(params)
    return dc.a_dl if direction is Direction.DL else dc.a_ul


def association(query: AssocQuery, params: SystemParams) -> AssocResult:
    if query.criterion is Criterion.MAX_BRP:
        return assoc_brp(query.direction, params)
    return assoc_rate(query.direction, params)


def assoc_brp(direction: Direction, params: SystemParams,
              spec: QuadratureSpec = DEFAULT_SPEC) -> AssocResult:
    """Max-BRP association, P(L_min,s > a L_min,m) by quadrature.

    Uses the substituted form (1/a) * int Fs(l) fm(l/a) dl so that the Scell
    branch breakpoints sit at fixed pathloss values.
    """
    a = weight_ratio(direction, params)
    ms = PathlossTier(Tier.MCELL, params)
    ss = PathlossTier(Tier.SCELL, params)

    def g(l):
        return ss.ccdf(l) * ms.pdf(l / a) / a

    points = (*ss.breakpoints, a * ms.scale, ss.scale)
    p_m = integrate_pathloss(g, points, spec)
    p_m = min(max(p_m, 0.0), 1.0)
    return AssocResult(p_m, 1.0 - p_m, "quadrature")


def assoc_brp_closed(direction: Direction, params: SystemParams) -> AssocResult:
    """Closed form of :func:`assoc_brp` for alpha_l = 2, alpha_n = alpha_m = 4."""
    p = params
    if not (p.alpha_l == 2.0 and p.alpha_n == 4.0 and p.alpha_m == 4.0):
        raise ValueError("closed form needs alpha_l = 2 and alpha_n = alpha_m = 4")
    a = weight_ratio(direction, p)
    mu = p.mu
    c1 = math.pi * p.lambda_s * p.omega
    c2 = math.pi * p.lambda_s * (1.0 - p.omega) + math.pi * p.lambda_m / math.sqrt(a)

    # LOS segment: int_0^mu exp(-c1 x^2 - c2 x) dx
    if c1 == 0.0:
        near = -math.expm1(-mu * c2) / c2
    elif c2 * c2 / (4.0 * c1) < 700.0:
        lo = c2 / math.sqrt(2.0 * c1)
        hi = (2.0 * mu * c1 + c2) / math.sqrt(2.0 * c1)
        near = (math.sqrt(math.pi / c1) * math.exp(c2 * c2 / (4.0 * c1))
                * (q_function(lo) - q_function(hi)))
    else:
        # exp(y^2) Q(y sqrt 2) = erfcx(y) / 2 keeps the product finite.
        y = c2 / (2.0 * math.sqrt(c1))
        y2 = y + mu * math.sqrt(c1)
        near = 0.5 * math.sqrt(math.pi / c1) * (
            special.erfcx(y) - special.erfcx(y2) * math.exp(-mu * c2 - mu * mu * c1))
    far = math.exp(-mu * mu * c1) * (
        math.exp(-mu * c2) / c2 - c1 * math.exp(-mu * mu * c2) / (c2 * (c1 + c2)))
    p_m = math.pi * p.lambda_m / math.sqrt(a) * (near + far)
    p_m = min(max(p_m, 0.0), 1.0)
    return AssocResult(p_m, 1.0 - p_m, "closed_form")


def snr_scale(direction: Direction, params: SystemParams) -> float:
    """``k`` with mmWave SNR = h / (k L): noise over transmit power times gain."""
    dc = derive(params)
    power = params.p_s if direction is Direction.DL else params.p_us
    return dc.sigma2_s / (power * dc.psi_s)


def snr_ccdf_mmwave(direction: Direction, z: float, params: SystemParams,
                    spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """P(SNR > z) on the link to the minimum-pathloss Scell (Rayleigh fading)."""
    if z < 0:
        raise ValueError("SNR threshold must be non-negative")
    k = snr_scale(direction, params)
    ss = PathlossTier(Tier.SCELL, params)
    points = (*ss.breakpoints, ss.scale) + ((1.0 / (z * k),) if z > 0 else ())
    return integrate_pathloss(lambda l: np.exp(-z * k * l) * ss.pdf(l), points, spec)


def snr_pdf_mmwave(direction: Direction, z, params: SystemParams,
                   spec: QuadratureSpec = DEFAULT_SPEC):
    """Density of the mmWave SNR: k * int l exp(-z k l) f_s(l) dl."""
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zs < 0) or np.any(np.isnan(zs)):
        raise ValueError("SNR must be non-negative")
    k = snr_scale(direction, params)
    ss = PathlossTier(Tier.SCELL, params)
    base = (*ss.breakpoints, ss.scale)
    out = np.empty_like(zs)
    for i, zi in enumerate(zs):
        points = base + ((1.0 / (zi * k),) if zi > 0 else ())
        out[i] = k * integrate_pathloss(
            lambda l, zi=zi: l * np.exp(-zi * k * l) * ss.pdf(l), points, spec)
    return float(out[0]) if np.ndim(z) == 0 else out


def _mcell_sir_ccdf_at_rate_parity(z, ratio, alpha):
    """1 / (1 + rho((1+z)^ratio - 1)) evaluated without overflow."""
    with np.errstate(over="ignore"):
        t = np.expm1(ratio * np.log1p(z))
    return 1.0 / (1.0 + np.asarray(rho(t, alpha)))


def assoc_rate(direction: Direction, params: SystemParams,
               spec: QuadratureSpec = OUTER_SPEC) -> AssocResult:
    """Max-Rate association with unit loads.

    P(Mcell) = int f_SNR(z) / (1 + rho((1+z)^(Ws/Wm) - 1, alpha_m)) dz; the
    outer integral runs over log z.
    """
    if params.lambda_s == 0:
        return AssocResult(1.0, 0.0, "quadrature")
    ratio = params.w_s / params.w_m
    alpha = params.alpha_m

    def h(y):
        z = np.exp(y)
        dens = snr_pdf_mmwave(direction, z, params)
        return dens * z * _mcell_sir_ccdf_at_rate_parity(z, ratio, alpha)

    # Split where the bandwidth-mapped threshold crosses its natural scales.
    splits = [math.log(math.expm1(math.log1p(t) / ratio)) for t in (1e-3, 1.0, 1e3)]
    k = snr_scale(direction, params)
    ss = PathlossTier(Tier.SCELL, params)
    for l in (*ss.breakpoints, ss.scale):
        splits.append(-math.log(k * l))
    lo, hi = min(splits) - 25.0, max(splits) + 10.0
    # Below lo the integrand is ~ pdf(0) z; above hi the SIR factor is negligible.
    head = snr_pdf_mmwave(direction, 0.0, params) * math.exp(lo)
    body = integrate(h, lo, hi, spec, points=splits)
    p_m = min(max(head + body, 0.0), 1.0)
    return AssocResult(p_m, 1.0 - p_m, "quadrature")


def decoupling_gain(params: SystemParams, criterion: Criterion = Criterion.MAX_BRP) -> float:
    """|P(UL Scell) - P(DL Scell)|: the share of UEs with split UL/DL tiers.

    Both criteria nest the per-drop events (one direction's Scell event
    contains the other's), so the difference of marginals is the share of
    decoupled UEs.
    """
    f = assoc_brp if criterion is Criterion.MAX_BRP else assoc_rate
    return abs(f(Direction.UL, params).p_scell - f(Direction.DL, params).p_scell)
