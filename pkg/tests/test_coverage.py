import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from dudenet.association import Direction, assoc_brp
from dudenet.coverage import (
    CoverageQuery,
    Kind,
    LoadModel,
    bisect_log,
    laplace_interference,
    load_model,
    mcell_coverage,
    mean_load,
    pc_interference_exponent,
    pc_interference_exponent_nested,
    percentile_rate,
    rate_coverage,
    rate_thresholds,
    scell_coverage,
    sinr_coverage,
    sinr_coverage_pc,
    window_excess,
)
from dudenet.montecarlo import WINDOW_RADIUS, empirical_ccdf, simulate
from dudenet.params import TABLE_I, db_to_linear, derive
from dudenet.pathloss import Tier

JOINT = TABLE_I.replace(joint_bias=True)


@pytest.mark.parametrize("direction", list(Direction))
def test_zero_threshold_is_association(direction):
    c = sinr_coverage(direction, TABLE_I, 1e-9)
    a = assoc_brp(direction, TABLE_I)
    assert c.mcell == pytest.approx(a.p_mcell, abs=1e-3)
    assert c.scell == pytest.approx(a.p_scell, abs=1e-3)
    assert c.total == pytest.approx(c.mcell + c.scell)


def test_noise_kills_scell_term():
    terms = [sinr_coverage(Direction.DL, TABLE_I.replace(noise_figure=db_to_linear(nf)), 1.0).scell
             for nf in (10.0, 100.0, 200.0, 300.0)]
    assert np.all(np.diff(terms) < 0)
    assert terms[-1] < 1e-15


@pytest.mark.parametrize("tau", [1e-3, 0.3, 1.0, 10.0, 1e3])
@pytest.mark.parametrize("l", [1e4, 1e8, 1e11])
def test_laplace_reduction_matches_direct_integral(tau, l):
    assert laplace_interference(tau, l, TABLE_I) == pytest.approx(
        laplace_interference(tau, l, TABLE_I, direct=True), rel=1e-7)


def test_coverage_query_dispatch():
    q = CoverageQuery(Direction.UL, 2.0, Kind.SINR)
    assert sinr_coverage(q, TABLE_I) == sinr_coverage(Direction.UL, TABLE_I, 2.0)


def test_coverage_nonincreasing_in_threshold():
    taus = np.logspace(-2, 3, 12)
    for d in Direction:
        cov = [sinr_coverage(d, TABLE_I, t).total for t in taus]
        assert np.all(np.diff(cov) <= 1e-12)


def test_power_control_without_compensation():
    for tau in (0.1, 1.0, 10.0):
        assert sinr_coverage_pc(tau, 0.0, TABLE_I).total == pytest.approx(
            sinr_coverage(Direction.UL, TABLE_I, tau).total, abs=1e-4)


def test_power_control_full_compensation_scell_factorises():
    tau, p = 1.0, TABLE_I
    dc = derive(p)
    ref = math.exp(-tau * dc.sigma2_s / (p.p_us * dc.psi_s)) * assoc_brp(Direction.UL, p).p_scell
    assert sinr_coverage_pc(tau, 1.0, p).scell == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("eps", [0.3, 0.7, 1.0])
@pytest.mark.parametrize("l", [1e6, 1e9])
def test_power_control_exponent_collapse_matches_nested(eps, l):
    fast = pc_interference_exponent(1.0, eps, l, TABLE_I)
    slow = pc_interference_exponent_nested(1.0, eps, l, TABLE_I)
    assert fast == pytest.approx(slow, rel=1e-5)


def test_power_control_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        sinr_coverage_pc(1.0, 1.5, TABLE_I)


def test_mean_load_values():
    assert mean_load(Direction.DL, Tier.SCELL, 0.0, TABLE_I) == 1.0
    assert mean_load(Direction.DL, Tier.SCELL, 0.5, TABLE_I) == pytest.approx(3.56)
    assert mean_load(Direction.DL, Tier.MCELL, 0.9, TABLE_I.replace(lambda_u=1e-15)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mean_load(Direction.DL, Tier.MCELL, 1.5, TABLE_I)


def test_rate_formula_instance():
    loads = LoadModel(1.0, 1.0)
    tm, ts = rate_thresholds(1e10, loads, TABLE_I)
    assert ts == pytest.approx(2.0 ** 10 - 1)
    assert tm == pytest.approx(2.0 ** 500, rel=1e-12)
    tm, ts = rate_thresholds(1e12, loads, TABLE_I)  # 2^50000 overflows
    assert math.isinf(tm) and math.isfinite(ts)
    assert rate_coverage(Direction.DL, TABLE_I, 1e13, loads).total == 0.0


def test_rate_vanishing_threshold():
    for d in Direction:
        assert rate_coverage(d, TABLE_I, 1e-3).total == pytest.approx(1.0, abs=1e-3)


def test_rate_plateau():
    loads = load_model(Direction.DL, JOINT)
    drop = rate_coverage(Direction.DL, JOINT, 2e7, loads).total - rate_coverage(Direction.DL, JOINT, 5e8, loads).total
    assert 0.0 <= drop <= 0.1


def test_bisect_on_step():
    step = 3.7e6
    cov = lambda r: 1.0 if r < step else 0.0
    assert bisect_log(cov, 0.95, 1e3, 1e11) == pytest.approx(step, rel=0.01)
    with pytest.raises(ValueError):
        bisect_log(cov, 0.95, 1e7, 1e11)


def test_percentile_ordering():
    for d in Direction:
        assert percentile_rate(d, 0.95, TABLE_I) <= percentile_rate(d, 0.5, TABLE_I)


def test_bias_optimum_location():
    grid = list(range(0, 65, 5))
    for d, (lo, hi) in ((Direction.DL, (30, 40)), (Direction.UL, (25, 35))):
        rates = [percentile_rate(d, 0.95, JOINT.replace(t_s=db_to_linear(b))) for b in grid]
        assert lo <= grid[int(np.argmax(rates))] <= hi


@pytest.mark.parametrize("l", [1e6, 1e8, 1e10, 1e12])
@pytest.mark.parametrize("radius", [500.0, 3000.0])
def test_window_excess_radial_oracle(l, radius):
    tau, p = 2.0, TABLE_I
    r0 = max(radius, l ** (1 / p.alpha_m))
    ref = 2 * math.pi * p.lambda_m * sp_integrate.quad(
        lambda r: r / (1 + r ** p.alpha_m / (tau * l)), r0, math.inf, limit=200)[0]
    assert window_excess(tau, l, p, radius) == pytest.approx(ref, rel=1e-8)


def test_window_converges_to_plane():
    full = sinr_coverage(Direction.DL, TABLE_I, 1.0).total
    gaps = [sinr_coverage(Direction.DL, TABLE_I, 1.0, window_radius=r).total - full
            for r in (1e3, 3e3, 1e4, 1e5)]
    assert np.all(np.diff(gaps) < 0) and 0 < gaps[-1] < 1e-3


# ---------------------------------------------------------------------------
# Monte Carlo oracles

@pytest.fixture(scope="module")
def full_drops():
    return simulate(TABLE_I, 20000, 32)


@pytest.mark.slow
def test_dl_sinr_matches_monte_carlo(full_drops):
    p, hw = empirical_ccdf(full_drops.sinr_dl, [1.0])
    # Same network as simulated: interferers limited to the simulation window.
    windowed = sinr_coverage(Direction.DL, TABLE_I, 1.0, window_radius=WINDOW_RADIUS).total
    assert abs(p[0] - windowed) <= hw[0]
    assert abs(p[0] - sinr_coverage(Direction.DL, TABLE_I, 1.0).total) <= 0.02


@pytest.mark.slow
def test_ul_sinr_matches_monte_carlo(full_drops):
    p, hw = empirical_ccdf(full_drops.sinr_ul, [1.0])
    assert abs(p[0] - sinr_coverage(Direction.UL, TABLE_I, 1.0).total) <= hw[0]


def _semi_analytic_rate(samples, direction, rate, params):
    """Analytic tier coverage averaged over the simulated per-drop loads."""
    tier = samples.get("tier", direction)
    load = samples.get("load", direction)
    assoc = assoc_brp(direction, params)
    total = 0.0
    for t, n in {(int(a), int(b)) for a, b in zip(tier, load)}:
        count = np.count_nonzero((tier == t) & (load == n))
        tm, ts = rate_thresholds(rate, LoadModel(n, n), params)
        cov = (scell_coverage(direction, ts, params) / assoc.p_scell if t
               else mcell_coverage(direction, tm, params, window_radius=WINDOW_RADIUS)
               / assoc.p_mcell)
        total += count * cov
    return total / samples.n_drops


@pytest.mark.slow
@pytest.mark.parametrize("rate", [1e5, 1e6, 1e7, 1e8])
def test_rate_machinery_with_empirical_loads(full_drops, rate):
    # Isolates the mean-load approximation: per-drop loads fed to the analytic
    # DL tier terms (the DL interferer field is exact up to the window).
    p, hw = empirical_ccdf(full_drops.rate_dl, [rate])
    semi = _semi_analytic_rate(full_drops, Direction.DL, rate, TABLE_I)
    assert abs(p[0] - semi) <= hw[0]


@pytest.mark.slow
@pytest.mark.parametrize("direction", list(Direction))
def test_rate_coverage_matches_monte_carlo(full_drops, direction):
    p, hw = empirical_ccdf(full_drops.get("rate", direction), [1e6])
    assert abs(p[0] - rate_coverage(direction, TABLE_I, 1e6).total) <= hw[0]


@pytest.mark.slow
def test_power_control_matches_monte_carlo():
    s = simulate(TABLE_I.replace(epsilon=0.5), 20000, 33)
    p, hw = empirical_ccdf(s.sinr_ul, [1.0])
    assert abs(p[0] - sinr_coverage_pc(1.0, 0.5, TABLE_I).total) <= hw[0]
