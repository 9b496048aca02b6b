"""SINR and rate coverage of the typical UE under Max-BRP association.

The sub-6GHz tier is interference limited (all other Mcells, or one UE per
other Mcell in the UL, share the band); the mmWave tier is treated as noise
limited.  With Rayleigh fading the Mcell interference Laplace transform
factorises as exp(-pi lambda_m l^(2/alpha_m) rho(tau, alpha_m)), which turns
the coverage expressions into single integrals over the serving pathloss.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .association import Direction, assoc_brp, weight_ratio
from .numerics import DEFAULT_SPEC, OUTER_SPEC, QuadratureSpec, integrate, rho
from .params import SystemParams, derive
from .pathloss import PathlossTier, Tier, integrate_pathloss

__all__ = [
    "Kind",
    "CoverageQuery",
    "CoverageResult",
    "LoadModel",
    "laplace_interference",
    "mcell_coverage",
    "window_excess",
    "scell_coverage",
    "sinr_coverage",
    "sinr_coverage_pc",
    "mean_load",
    "load_model",
    "rate_thresholds",
    "rate_coverage",
    "percentile_rate",
    "percentile_sinr",
    "bisect_log",
]

# Mean-load constant for the area of a Poisson-Voronoi cell seen by a typical user.
LOAD_CONSTANT = 1.28


class Kind(enum.Enum):
    SINR = "sinr"
    RATE = "rate"


@dataclass(frozen=True)
class CoverageQuery:
    direction: Direction
    threshold: float
    kind: Kind = Kind.SINR

    def __post_init__(self):
        if self.kind is Kind.RATE and not self.threshold > 0:
            raise ValueError("rate threshold must be > 0")
        if not self.threshold >= 0:
            raise ValueError("SINR threshold must be >= 0")


@dataclass(frozen=True)
class CoverageResult:
    total: float
    mcell: float
    scell: float


@dataclass(frozen=True)
class LoadModel:
    n_bar_m: float
    n_bar_s: float


def _tx_powers(direction: Direction, params: SystemParams) -> tuple[float, float]:
    if direction is Direction.DL:
        return params.p_m, params.p_s
    return params.p_um, params.p_us


def laplace_interference(tau, l, params: SystemParams, direct: bool = False,
                         spec: QuadratureSpec = DEFAULT_SPEC):
    """Laplace transform of the normalised Mcell interference at s = tau.

    ``direct=True`` integrates exp(-(2 pi lambda_m / alpha_m) int_l^inf
    t^(2/alpha_m - 1) / (1 + t / (tau l)) dt) numerically; the default uses the
    closed reduction through :func:`rho`.
    """
    p = params
    d = 2.0 / p.alpha_m
    if not direct:
        return np.exp(-math.pi * p.lambda_m * np.power(l, d) * rho(tau, p.alpha_m))
    if tau == 0:
        return 1.0
    # t = l e^x: the algebraic tail becomes an exponential one.
    inner = integrate(lambda x: np.exp((d - 1.0) * x) / (np.exp(-x) + 1.0 / tau), 0.0, math.inf,
                      spec, points=[max(1.0, math.log(tau))])
    return math.exp(-2.0 * math.pi * p.lambda_m / p.alpha_m * l ** d * inner)


def _check_tau(tau):
    if not (tau >= 0):
        raise ValueError(f"SINR threshold must be >= 0, got {tau!r}")


def window_excess(tau: float, l, params: SystemParams, window_radius: float):
    """Part of the interference exponent due to Mcells beyond ``window_radius``.

    Subtracting it from pi lambda_m l^d rho(tau) gives the exponent of a
    network truncated to a disk around the typical UE, as simulated.
    """
    p = params
    d = 2.0 / p.alpha_m
    l = np.asarray(l, dtype=float)
    s = tau * l
    # Interferers start at the serving pathloss or the window edge, whichever is farther.
    edge = np.maximum(window_radius ** p.alpha_m, l)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = 2.0 * math.pi * p.lambda_m / p.alpha_m * s ** d * _tail_ratio(edge / s, d)
    return np.where(s > 0, out, 0.0)


def mcell_coverage(direction: Direction, tau: float, params: SystemParams,
                   spec: QuadratureSpec = DEFAULT_SPEC,
                   window_radius: float | None = None) -> float:
    """P(served by the Mcell tier and SINR > tau).

    ``window_radius`` drops interferers beyond that distance from the typical
    UE (finite simulation window); None means the infinite plane.
    """
    _check_tau(tau)
    if math.isinf(tau):
        return 0.0
    dc = derive(params)
    a = weight_ratio(direction, params)
    p_tx, _ = _tx_powers(direction, params)
    noise = tau * dc.sigma2_m / (p_tx * dc.psi_m)
    interf = math.pi * params.lambda_m * rho(tau, params.alpha_m)
    d = 2.0 / params.alpha_m
    ms = PathlossTier(Tier.MCELL, params)
    ss = PathlossTier(Tier.SCELL, params)

    def g(l):
        expo = noise * l + interf * l ** d
        if window_radius is not None:
            with np.errstate(invalid="ignore"):
                expo = expo - window_excess(tau, l, params, window_radius)
            expo = np.where(np.isnan(expo), np.inf, expo)  # inf - inf where ms.pdf vanishes
        return np.exp(-expo) * ss.ccdf(a * l) * ms.pdf(l)

    points = [b / a for b in ss.breakpoints] + [ms.scale, ss.scale / a]
    if noise > 0:
        points.append(1.0 / noise)
    if interf > 0:
        points.append(interf ** (-1.0 / d))
    return integrate_pathloss(g, points, spec)


def scell_coverage(direction: Direction, tau: float, params: SystemParams,
                   spec: QuadratureSpec = DEFAULT_SPEC, epsilon: float = 0.0) -> float:
    """P(served by the Scell tier and SNR > tau); ``epsilon`` scales noise by l^(1-eps)."""
    _check_tau(tau)
    if math.isinf(tau):
        return 0.0
    dc = derive(params)
    a = weight_ratio(direction, params)
    _, p_tx = _tx_powers(direction, params)
    noise = tau * dc.sigma2_s / (p_tx * dc.psi_s)
    e = 1.0 - epsilon
    ms = PathlossTier(Tier.MCELL, params)
    ss = PathlossTier(Tier.SCELL, params)

    def g(l):
        return np.exp(-noise * l ** e) * ms.ccdf(l / a) * ss.pdf(l)

    points = [*ss.breakpoints, a * ms.scale, ss.scale]
    if noise > 0 and e > 0:
        points.append(noise ** (-1.0 / e))
    return integrate_pathloss(g, points, spec)


def sinr_coverage(query: CoverageQuery | Direction, params: SystemParams,
                  tau: float | None = None, window_radius: float | None = None) -> CoverageResult:
    """Coverage P(SINR > tau) split into its Mcell and Scell components.

    Accepts either a :class:`CoverageQuery` or ``(direction, params, tau)``.
    """
    if isinstance(query, CoverageQuery):
        if query.kind is not Kind.SINR:
            raise ValueError("use rate_coverage for rate queries")
        direction, tau = query.direction, query.threshold
    else:
        direction = query
    pm = mcell_coverage(direction, tau, params, window_radius=window_radius)
    ps = scell_coverage(direction, tau, params)
    return CoverageResult(pm + ps, pm, ps)


# ---------------------------------------------------------------------------
# fractional power control (UL)

def _tail_ratio(x, d):
    """int_x^inf y^(d-1) / (1 + y) dy for x >= 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        z = 1.0 / (1.0 + x)
        out = (math.pi / math.sin(math.pi * d)) * special.betainc(1.0 - d, d, z)
    return np.where(np.isinf(x), 0.0, out)


def pc_interference_exponent(tau: float, epsilon: float, l: float, params: SystemParams,
                             spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Exponent -log L_I(l) of the UL Mcell interference under power control.

    Each interferer transmits P u^eps where u is its own serving pathloss (drawn
    from the Mcell minimum-pathloss law); the serving link gets l^(1-eps).
    Swapping the order of the t and u integrals reduces the middle integral to
    s^d G(l/s) with s = tau l^(1-eps) u^eps.
    """
    p = params
    d = 2.0 / p.alpha_m
    ms = PathlossTier(Tier.MCELL, p)
    if tau == 0:
        return 0.0

    def g(u):
        s = tau * l ** (1.0 - epsilon) * u ** epsilon
        return ms.pdf(u) * s ** d * _tail_ratio(l / s, d)

    m = integrate_pathloss(g, (ms.scale, l), spec)
    return 2.0 * math.pi * p.lambda_m / p.alpha_m * m


def pc_interference_exponent_nested(tau: float, epsilon: float, l: float,
                                    params: SystemParams,
                                    spec: QuadratureSpec = OUTER_SPEC) -> float:
    """Literal nested form of :func:`pc_interference_exponent` (slow reference)."""
    p = params
    d = 2.0 / p.alpha_m
    ms = PathlossTier(Tier.MCELL, p)

    def mean_failure(t):
        # 1 - E[1 / (1 + c/t)] written as E[c / (t + c)]: no cancellation at large t.
        out = np.empty(np.shape(t))
        for i, ti in enumerate(np.ravel(t)):
            def g(u, ti=ti):
                c = tau * l ** (1.0 - epsilon) * u ** epsilon
                return ms.pdf(u) * c / (ti + c)
            out.flat[i] = integrate_pathloss(g, (ms.scale,), spec)
        return out

    # The integrand decays like exp((d - 1) x); past x_max it is far below
    # double resolution and t itself would overflow.
    x_max = math.log(1e300 / l)

    def h(x):
        x = np.asarray(x, dtype=float)
        ok = x < x_max
        t = l * np.exp(np.where(ok, x, 0.0))
        return np.where(ok, mean_failure(t) * t ** d, 0.0)

    m = integrate(h, 0.0, math.inf, spec, points=[1.0, math.log(max(tau, 2.0))])
    return 2.0 * math.pi * p.lambda_m / p.alpha_m * m


def sinr_coverage_pc(tau: float, epsilon: float, params: SystemParams,
                     spec: QuadratureSpec = OUTER_SPEC) -> CoverageResult:
    """UL coverage with fractional pathloss compensation P L^eps at every UE."""
    _check_tau(tau)
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if epsilon == 0.0:
        return sinr_coverage(Direction.UL, params, tau)
    dc = derive(params)
    a = weight_ratio(Direction.UL, params)
    noise = tau * dc.sigma2_m / (params.p_um * dc.psi_m)
    e = 1.0 - epsilon
    ms = PathlossTier(Tier.MCELL, params)
    ss = PathlossTier(Tier.SCELL, params)

    def g(l):
        ls = np.atleast_1d(l)
        expo = np.array([pc_interference_exponent(tau, epsilon, li, params)
                         for li in ls])
        return np.exp(-noise * ls ** e - expo) * ss.ccdf(a * ls) * ms.pdf(ls)

    points = [b / a for b in ss.breakpoints] + [ms.scale, ss.scale / a]
    if noise > 0 and e > 0:
        points.append(noise ** (-1.0 / e))
    pm = integrate_pathloss(g, points, spec)
    ps = scell_coverage(Direction.UL, tau, params, epsilon=epsilon)
    return CoverageResult(pm + ps, pm, ps)


# ---------------------------------------------------------------------------
# load and rate

def mean_load(direction: Direction, tier: Tier, assoc_prob: float,
              params: SystemParams) -> float:
    """Mean number of UEs sharing the serving cell, typical UE included."""
    if not 0.0 <= assoc_prob <= 1.0:
        raise ValueError("association probability must lie in [0, 1]")
    density = params.lambda_m if tier is Tier.MCELL else params.lambda_s
    return 1.0 + LOAD_CONSTANT * params.lambda_u * assoc_prob / density


def load_model(direction: Direction, params: SystemParams) -> LoadModel:
    assoc = assoc_brp(direction, params)
    return LoadModel(
        mean_load(direction, Tier.MCELL, assoc.p_mcell, params),
        mean_load(direction, Tier.SCELL, assoc.p_scell, params),
    )


def rate_thresholds(rate: float, loads: LoadModel, params: SystemParams) -> tuple[float, float]:
    """SINR thresholds 2^(rate N / W) - 1 per tier (inf on overflow)."""
    with np.errstate(over="ignore"):
        tm = float(np.expm1(math.log(2.0) * rate * loads.n_bar_m / params.w_m))
        ts = float(np.expm1(math.log(2.0) * rate * loads.n_bar_s / params.w_s))
    return tm, ts


def rate_coverage(query: CoverageQuery | Direction, params: SystemParams,
                  rate: float | None = None, loads: LoadModel | None = None) -> CoverageResult:
    """P(rate > threshold) with equal resource sharing among the mean load."""
    if isinstance(query, CoverageQuery):
        if query.kind is not Kind.RATE:
            raise ValueError("use sinr_coverage for SINR queries")
        direction, rate = query.direction, query.threshold
    else:
        direction = query
    if not rate > 0:
        raise ValueError("rate threshold must be > 0")
    if loads is None:
        loads = load_model(direction, params)
    tm, ts = rate_thresholds(rate, loads, params)
    pm = mcell_coverage(direction, tm, params)
    ps = scell_coverage(direction, ts, params)
    return CoverageResult(pm + ps, pm, ps)


def bisect_log(coverage, p: float, lo: float, hi: float, rel_width: float = 0.01) -> float:
    """Solve coverage(x) = p for a nonincreasing coverage by bisection in log x."""
    if not 0.0 < p < 1.0:
        raise ValueError("percentile level must lie in (0, 1)")
    c_lo, c_hi = coverage(lo), coverage(hi)
    if not c_lo >= p >= c_hi:
        raise ValueError(
            f"coverage {c_hi:.4g}..{c_lo:.4g} over [{lo:.3g}, {hi:.3g}] does not reach {p}")
    while hi / lo - 1.0 > rel_width:
        mid = math.sqrt(lo * hi)
        if coverage(mid) >= p:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def percentile_rate(direction: Direction, p: float, params: SystemParams,
                    bracket: tuple[float, float] = (1e3, 1e11)) -> float:
    """Rate met by a fraction ``p`` of UEs, i.e. rate_coverage(rate) = p.

    ``p = 0.95`` gives the 5th-percentile rate.
    """
    loads = load_model(direction, params)
    return bisect_log(lambda r: rate_coverage(direction, params, r, loads).total, p, *bracket)


def percentile_sinr(direction: Direction, p: float, params: SystemParams,
                    bracket: tuple[float, float] = (1e-6, 1e9)) -> float:
    """Linear SINR threshold tau with sinr_coverage(tau) = p."""
    return bisect_log(lambda t: sinr_coverage(direction, params, t).total, p, *bracket)
