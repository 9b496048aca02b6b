"""Drop-based simulator of the two-tier network around a typical UE.

Every drop samples independent PPPs of Mcells, Scells and UEs in a disk
centred on the typical UE (index 0, at the origin), associates every UE by
its minimum pathloss per tier, and records the typical UE's serving tier,
SINR, SNR, load and rate in both directions.

Random streams are keyed by (seed, drop, stream) so that any drop can be
regenerated on its own.  Blockage marks are a deterministic function of
(drop key, Scell, receiver), which keeps every link's LOS state consistent
however often it is evaluated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..association import Criterion, Direction
from ..params import SystemParams, derive
from ..pathloss import Tier
from . import kernels

__all__ = [
    "WINDOW_RADIUS",
    "Stream",
    "stream_rng",
    "NetworkRealization",
    "LinkSamples",
    "sample_realization",
    "associate",
    "simulate",
]

WINDOW_RADIUS = 3000.0
MCELL, SCELL = 0, 1


class Stream(enum.IntEnum):
    MCELLS = 0
    SCELLS = 1
    UES = 2
    MARKS = 3
    FADING = 4
    BEAMS = 5
    SELECTION = 6


def stream_rng(seed: int, drop: int, stream: Stream, attempt: int = 0) -> np.random.Generator:
    """Counter-based generator for one (seed, drop, stream) cell."""
    ss = np.random.SeedSequence(seed, spawn_key=(drop, int(stream), attempt))
    return np.random.Generator(np.random.Philox(ss))


def _uniform_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    phi = 2.0 * math.pi * rng.random(n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


@dataclass
class NetworkRealization:
    mcells: np.ndarray
    scells: np.ndarray
    ues: np.ndarray          # row 0 is the typical UE at the origin
    seed: int
    drop: int
    window_radius: float
    mark_key: int
    rejected: int = 0        # resampled attempts with an empty Mcell tier

    def los_marks(self, params: SystemParams, receiver: int = 0) -> np.ndarray:
        """LOS state of every Scell as seen from UE ``receiver``."""
        d2 = np.sum((self.scells - self.ues[receiver]) ** 2, axis=1)
        u = kernels.pair_uniforms(self.mark_key, np.arange(len(self.scells)), receiver)
        return (d2 <= params.mu ** 2) & (u < params.omega)


def sample_realization(params: SystemParams, seed: int,
                       window_radius: float = WINDOW_RADIUS, drop: int = 0,
                       with_ues: bool = True) -> NetworkRealization:
    """Sample one drop; drops without any Mcell are rejected and redrawn."""
    if not window_radius > 0:
        raise ValueError("window radius must be positive")
    area = math.pi * window_radius ** 2
    attempt = 0
    while True:
        rng = stream_rng(seed, drop, Stream.MCELLS, attempt)
        n_m = rng.poisson(params.lambda_m * area)
        if n_m > 0:
            break
        attempt += 1
    mcells = _uniform_disk(rng, n_m, window_radius)
    rng = stream_rng(seed, drop, Stream.SCELLS, attempt)
    scells = _uniform_disk(rng, rng.poisson(params.lambda_s * area), window_radius)
    ues = np.zeros((1, 2))
    if with_ues:
        rng = stream_rng(seed, drop, Stream.UES, attempt)
        field_ues = _uniform_disk(rng, rng.poisson(params.lambda_u * area), window_radius)
        ues = np.vstack([ues, field_ues])
    key = int(stream_rng(seed, drop, Stream.MARKS, attempt).integers(
        0, 2 ** 64, dtype=np.uint64))
    return NetworkRealization(mcells, scells, ues, seed, drop, window_radius, key, attempt)


# ---------------------------------------------------------------------------
# per-drop geometry

@dataclass
class _Geometry:
    real: NetworkRealization
    m_idx: np.ndarray        # nearest Mcell per UE
    l_m: np.ndarray          # its pathloss
    s_idx: np.ndarray        # minimum-pathloss Scell per UE (-1 if none)
    l_s: np.ndarray
    lm_origin: np.ndarray    # typical UE to every Mcell
    ls_origin: np.ndarray    # typical UE to every Scell (with marks)


def _geometry(real: NetworkRealization, params: SystemParams) -> _Geometry:
    p = params
    R = real.window_radius
    ux = np.ascontiguousarray(real.ues[:, 0])
    uy = np.ascontiguousarray(real.ues[:, 1])
    mg = kernels.Grid(real.mcells, R, max(R / 64.0, 0.5 / math.sqrt(p.lambda_m)))
    m_idx, d2 = kernels.nearest_many(ux, uy, mg.xs, mg.ys, mg.start, mg.order, mg.radius, mg.cell, mg.n)
    l_m = d2 ** (0.5 * p.alpha_m)
    sg = kernels.Grid(real.scells, R, max(p.mu, R / 256.0))
    s_idx, l_s = kernels.best_scell_many(
        ux, uy, sg.xs, sg.ys, sg.start, sg.order, sg.radius, sg.cell, sg.n,
        np.uint64(real.mark_key), p.omega, p.mu, p.alpha_l, p.alpha_n)
    lm_origin = np.sum(real.mcells ** 2, axis=1) ** (0.5 * p.alpha_m)
    d2s = np.sum(real.scells ** 2, axis=1)
    los = real.los_marks(p, 0)
    ls_origin = np.where(los, d2s ** (0.5 * p.alpha_l), d2s ** (0.5 * p.alpha_n))
    return _Geometry(real, m_idx, l_m, s_idx, l_s, lm_origin, ls_origin)


def associate(realization: NetworkRealization, direction: Direction,
              criterion: Criterion, params: SystemParams) -> Tier:
    """Serving tier of the typical UE in one realization.

    Max-BRP compares minimum pathlosses only.  Max-Rate compares unit-load
    rates, sub-6GHz SIR against mmWave SNR, with the drop's fading.
    """
    real = NetworkRealization(realization.mcells, realization.scells, realization.ues[:1],
                              realization.seed, realization.drop, realization.window_radius,
                              realization.mark_key, realization.rejected)
    geo = _geometry(real, params)
    dc = derive(params)
    if geo.s_idx[0] < 0:
        return Tier.MCELL
    if criterion is Criterion.MAX_BRP:
        a = dc.a_dl if direction is Direction.DL else dc.a_ul
        return Tier.SCELL if geo.l_s[0] <= a * geo.l_m[0] else Tier.MCELL
    draws = _Draws(real, params)
    scell = _max_rate_scell(geo, draws, params, dc)
    return Tier.SCELL if scell[0 if direction is Direction.DL else 1] else Tier.MCELL


@dataclass
class _Draws:
    """Fading, beam and selection variates of one drop (independent of variants)."""

    h_dl_m: np.ndarray
    h_dl_s: np.ndarray
    h_ul_m: np.ndarray
    h_ul_s: np.ndarray
    beam_dl: np.ndarray
    beam_ul: np.ndarray
    priority: np.ndarray

    def __init__(self, real: NetworkRealization, params: SystemParams):
        n_m, n_s = len(real.mcells), len(real.scells)
        seed, drop, att = real.seed, real.drop, real.rejected
        rng = stream_rng(seed, drop, Stream.FADING, att)
        self.h_dl_m = rng.exponential(size=n_m)
        self.h_dl_s = rng.exponential(size=n_s)
        self.h_ul_m = rng.exponential(size=n_m)
        self.h_ul_s = rng.exponential(size=n_s)
        rng = stream_rng(seed, drop, Stream.BEAMS, att)
        self.beam_dl = rng.random(n_s)
        self.beam_ul = rng.random(n_s)
        rng = stream_rng(seed, drop, Stream.SELECTION, att)
        self.priority = rng.random(len(real.ues))


def _max_rate_scell(geo: _Geometry, draws: _Draws, p: SystemParams, dc) -> tuple[bool, bool]:
    """(DL, UL) Max-Rate choice of the typical UE: True means Scell."""
    s0 = geo.s_idx[0]
    if s0 < 0:
        return False, False
    m0 = geo.m_idx[0]
    rx = draws.h_dl_m / geo.lm_origin
    sig = rx[m0]
    interf = rx.sum() - sig
    sir = sig / interf if interf > 0 else math.inf
    rate_m = p.w_m * math.log2(1.0 + sir)
    gain = draws.h_dl_s[s0] / geo.l_s[0] * dc.psi_s / dc.sigma2_s
    out = []
    for power in (p.p_s, p.p_us):
        out.append(p.w_s * math.log2(1.0 + power * gain) > rate_m)
    return out[0], out[1]


# ---------------------------------------------------------------------------
# sample containers

_FIELDS = ("tier_dl", "tier_ul", "rate_tier_dl", "rate_tier_ul", "l_m", "l_s",
           "sinr_dl", "sinr_ul", "snr_dl", "snr_ul", "load_dl", "load_ul",
           "rate_dl", "rate_ul")


@dataclass
class LinkSamples:
    """Per-drop observations of the typical UE for one parameter set.

    Tiers are 0 (Mcell) or 1 (Scell); ``tier_*`` follow Max-BRP and
    ``rate_tier_*`` follow Max-Rate.  SINR/SNR/load/rate refer to the Max-BRP
    serving link.  UL SINR, loads and rates need the full UE field and are
    NaN in typical-only runs.
    """

    params: SystemParams
    n_drops: int
    tier_dl: np.ndarray = field(repr=False)
    tier_ul: np.ndarray = field(repr=False)
    rate_tier_dl: np.ndarray = field(repr=False)
    rate_tier_ul: np.ndarray = field(repr=False)
    l_m: np.ndarray = field(repr=False)
    l_s: np.ndarray = field(repr=False)
    sinr_dl: np.ndarray = field(repr=False)
    sinr_ul: np.ndarray = field(repr=False)
    snr_dl: np.ndarray = field(repr=False)
    snr_ul: np.ndarray = field(repr=False)
    load_dl: np.ndarray = field(repr=False)
    load_ul: np.ndarray = field(repr=False)
    rate_dl: np.ndarray = field(repr=False)
    rate_ul: np.ndarray = field(repr=False)
    rejected: int = 0
    silent_cells: int = 0    # non-serving Mcells without any UL UE, summed over drops
    other_cells: int = 0     # non-serving Mcells, summed over drops

    @classmethod
    def empty(cls, params: SystemParams, n: int) -> "LinkSamples":
        arrays = {}
        for name in _FIELDS:
            if "tier" in name:
                arrays[name] = np.zeros(n, dtype=np.int8)
            else:
                arrays[name] = np.full(n, np.nan)
        return cls(params, n, **arrays)

    def get(self, metric: str, direction: Direction) -> np.ndarray:
        return getattr(self, f"{metric}_{direction.value}")


# ---------------------------------------------------------------------------
# per-variant evaluation

def _downlink(k, out, geo, draws, p, dc, tier_all, scell, mmw_interference, full_field):
    if not scell:
        m0 = geo.m_idx[0]
        rx = draws.h_dl_m / geo.lm_origin
        sig = rx[m0]
        noise = dc.sigma2_m / (p.p_m * dc.psi_m)
        interf = rx.sum() - sig
        width, cell, idx = p.w_m, m0, geo.m_idx
    else:
        s0 = geo.s_idx[0]
        sig = draws.h_dl_s[s0] / geo.l_s[0]
        noise = dc.sigma2_s / (p.p_s * dc.psi_s)
        interf = 0.0
        if mmw_interference:
            g = np.where(draws.beam_dl < p.theta_s / (2 * math.pi), p.g_s_max, p.g_s_min)
            rx = draws.h_dl_s * (g / p.g_s_max) / geo.ls_origin
            interf = rx.sum() - rx[s0]
        width, cell, idx = p.w_s, s0, geo.s_idx
    out.snr_dl[k] = sig / noise
    out.sinr_dl[k] = sig / (interf + noise)
    if full_field:
        load = np.count_nonzero((tier_all == scell) & (idx == cell))
        out.load_dl[k] = load
        out.rate_dl[k] = width / load * math.log2(1.0 + out.sinr_dl[k])


def _uplink(k, out, geo, draws, p, dc, tier_all, scell, mmw_interference):
    real = geo.real
    eps = p.epsilon
    own = np.where(tier_all, geo.l_s, geo.l_m)
    if not scell:
        m0 = geo.m_idx[0]
        cells = np.where(tier_all, -1, geo.m_idx)
        sel = kernels.pick_one_per_cell(cells, len(real.mcells), draws.priority, 0)
        sel[m0] = -1
        active = np.flatnonzero(sel >= 0)
        users = sel[active]
        d2 = np.sum((real.ues[users] - real.mcells[m0]) ** 2, axis=1)
        path = d2 ** (0.5 * p.alpha_m)
        interf = np.sum(draws.h_ul_m[active] * own[users] ** eps / path)
        sig = draws.h_ul_m[m0] * geo.l_m[0] ** (eps - 1.0)
        noise = dc.sigma2_m / (p.p_um * dc.psi_m)
        out.silent_cells += len(real.mcells) - 1 - len(active)
        out.other_cells += len(real.mcells) - 1
        width, cell, idx = p.w_m, m0, geo.m_idx
    else:
        s0 = geo.s_idx[0]
        sig = draws.h_ul_s[s0] * geo.l_s[0] ** (eps - 1.0)
        noise = dc.sigma2_s / (p.p_us * dc.psi_s)
        interf = 0.0
        if mmw_interference:
            cells = np.where(tier_all, geo.s_idx, -1)
            sel = kernels.pick_one_per_cell(cells, len(real.scells), draws.priority, 0)
            sel[s0] = -1
            active = np.flatnonzero(sel >= 0)
            users = sel[active]
            d2 = np.sum((real.ues[users] - real.scells[s0]) ** 2, axis=1)
            u = kernels.pair_uniform_receivers(np.uint64(real.mark_key), s0, users)
            los = (d2 <= p.mu ** 2) & (u < p.omega)
            path = np.where(los, d2 ** (0.5 * p.alpha_l), d2 ** (0.5 * p.alpha_n))
            g = np.where(draws.beam_ul[active] < p.theta_s / (2 * math.pi), p.g_s_max, p.g_s_min)
            interf = np.sum(draws.h_ul_s[active] * (g / p.g_s_max) * own[users] ** eps / path)
        width, cell, idx = p.w_s, s0, geo.s_idx
    out.snr_ul[k] = sig / noise
    out.sinr_ul[k] = sig / (interf + noise)
    load = np.count_nonzero((tier_all == scell) & (idx == cell))
    out.load_ul[k] = load
    out.rate_ul[k] = width / load * math.log2(1.0 + out.sinr_ul[k])


def simulate(params: SystemParams, n_drops: int, seed: int, *,
             variants: list[SystemParams] | None = None,
             full_field: bool = True,
             include_mmwave_interference: bool = False,
             window_radius: float = WINDOW_RADIUS,
             first_drop: int = 0):
    """Run ``n_drops`` drops and collect the typical UE's link samples.

    ``variants`` are parameter sets sharing ``params``'s point-process
    geometry (densities, exponents, blockage); they are evaluated on the same
    realizations and fading draws, which makes bias or power sweeps cheap
    and their differences low-variance.  Returns one :class:`LinkSamples`
    per variant (a single one when ``variants`` is None).
    """
    if n_drops < 1:
        raise ValueError("n_drops must be >= 1")
    sets = [params] if variants is None else list(variants)
    for v in sets:
        if v.geometry != params.geometry:
            raise ValueError("variants must share the sampled geometry")
    derived = [derive(v) for v in sets]
    outs = [LinkSamples.empty(v, n_drops) for v in sets]
    for k in range(n_drops):
        real = sample_realization(params, seed, window_radius, first_drop + k, full_field)
        geo = _geometry(real, params)
        draws = _Draws(real, params)
        has_s = geo.s_idx >= 0
        for v, dc, out in zip(sets, derived, outs):
            out.rejected += real.rejected
            out.l_m[k] = geo.l_m[0]
            out.l_s[k] = geo.l_s[0]
            dl_all = has_s & (geo.l_s <= dc.a_dl * geo.l_m)
            ul_all = has_s & (geo.l_s <= dc.a_ul * geo.l_m)
            out.tier_dl[k] = dl_all[0]
            out.tier_ul[k] = ul_all[0]
            r_dl, r_ul = _max_rate_scell(geo, draws, v, dc)
            out.rate_tier_dl[k] = r_dl
            out.rate_tier_ul[k] = r_ul
            _downlink(k, out, geo, draws, v, dc, dl_all, bool(dl_all[0]),
                      include_mmwave_interference, full_field)
            if full_field:
                _uplink(k, out, geo, draws, v, dc, ul_all, bool(ul_all[0]),
                        include_mmwave_interference)
    return outs[0] if variants is None else outs
