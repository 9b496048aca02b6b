import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from dudenet.params import TABLE_I
from dudenet.pathloss import PathlossTier, Tier, integrate_pathloss


def mcell(p=TABLE_I):
    return PathlossTier(Tier.MCELL, p)


def scell(p=TABLE_I):
    return PathlossTier(Tier.SCELL, p)


def _radial_intensity(lam, t, los_law):
    """2 pi lam int r P(pathloss(r) < t) dr, with los_law(r) -> (p_los, a_los, a_nlos)."""
    def f(r):
        w, al, an = los_law(r)
        return 2 * math.pi * lam * r * (w * (r ** al < t) + (1 - w) * (r ** an < t))
    rmax = max(t ** 0.5, t ** 0.25) * 1.01 + 1.0
    pts = sorted({t ** (1 / 2), t ** (1 / 4), 200.0})
    return sp_integrate.quad(f, 0.0, rmax, points=[x for x in pts if x < rmax], limit=500)[0]


def test_mcell_intensity_radial_oracle():
    lam = mcell().intensity(1e9)
    assert lam == pytest.approx(5 * math.pi, rel=1e-12)
    oracle = sp_integrate.quad(lambda r: 2 * math.pi * 5e-6 * r, 0, 1e9 ** (1 / 3))[0]
    assert lam == pytest.approx(oracle, rel=1e-9)


@pytest.mark.parametrize("t", [1e2, 3e4, 4e4, 1e6, 1.6e9, 1e10])
def test_scell_intensity_radial_oracle(t):
    p = TABLE_I
    law = lambda r: (p.omega if r <= p.mu else 0.0, p.alpha_l, p.alpha_n)
    assert scell().intensity(t) == pytest.approx(_radial_intensity(p.lambda_s, t, law), rel=1e-6)


def test_empty_interval_and_void_probability():
    assert scell().intensity(0.0) == 0.0
    assert mcell().ccdf(0.0) == 1.0 and scell().ccdf(0.0) == 1.0


def test_ccdf_is_exp_of_intensity():
    assert mcell().ccdf(1e9) == pytest.approx(math.exp(-5 * math.pi), rel=1e-12)
    assert mcell().ccdf(1e9) == pytest.approx(1.5e-7, rel=0.02)


def test_all_los_single_slope():
    p = TABLE_I.replace(omega=1.0)
    t = 0.5 * p.mu ** p.alpha_l
    assert scell(p).intensity(t) == pytest.approx(math.pi * p.lambda_s * t ** (2 / p.alpha_l))


def test_continuity_at_breakpoints():
    s = scell()
    for b in s.breakpoints:
        left, right = s.intensity(math.nextafter(b, 0.0)), s.intensity(b)
        assert left == pytest.approx(right, rel=1e-12)
        assert s.ccdf(math.nextafter(b, 0.0)) == pytest.approx(s.ccdf(b), rel=1e-12)


@pytest.mark.parametrize("tier", list(Tier))
def test_pdf_normalises(tier):
    pt = PathlossTier(tier, TABLE_I)
    assert integrate_pathloss(pt.pdf, (*pt.breakpoints, pt.scale)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("t", [1e5, 1e7, 3e8, 1e10])
def test_mcell_pdf_finite_difference(t):
    m = mcell()
    h = t * 1e-5
    fd = (m.ccdf(t - h) - m.ccdf(t + h)) / (2 * h)
    assert m.pdf(t) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("t", [1e2, 1e4, 5e6, 1e9, 1e10])
def test_scell_pdf_finite_difference(t):
    s = scell()
    h = t * 1e-6
    fd = (s.ccdf(t - h) - s.ccdf(t + h)) / (2 * h)
    assert s.pdf(t) == pytest.approx(fd, rel=1e-5)


def test_blockage_free_scell_is_mcell_law():
    p = TABLE_I.replace(omega=0.0)
    ref = TABLE_I.replace(lambda_m=p.lambda_s, alpha_m=p.alpha_n)
    t = np.logspace(0, 12, 40)
    np.testing.assert_allclose(scell(p).intensity(t), mcell(ref).intensity(t), rtol=1e-12)
    np.testing.assert_allclose(scell(p).pdf(t), mcell(ref).pdf(t), rtol=1e-12)


def test_zero_density_scell_tier():
    s = scell(TABLE_I.replace(lambda_s=0.0))
    assert s.ccdf(1e12) == 1.0 and s.pdf(1e6) == 0.0 and s.scale == math.inf


def test_invalid_arguments():
    with pytest.raises(ValueError):
        mcell().intensity(-1.0)
    with pytest.raises(ValueError):
        scell().pdf(0.0)
