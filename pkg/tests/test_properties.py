import numpy as np
from hypothesis import given, settings, strategies as st

from dudenet.association import AssocQuery, Criterion, Direction, association
from dudenet.coverage import sinr_coverage
from dudenet.montecarlo import empirical_ccdf
from dudenet.numerics import rho
from dudenet.params import TABLE_I, db_to_linear

ratios = st.floats(min_value=0.1, max_value=200.0)
biases = st.floats(min_value=0.0, max_value=40.0)


@settings(max_examples=30, deadline=None)
@given(ratio=ratios, bias=biases, direction=st.sampled_from(list(Direction)),
       criterion=st.sampled_from(list(Criterion)))
def test_association_probabilities_are_complementary(ratio, bias, direction, criterion):
    p = TABLE_I.replace(lambda_s=ratio * TABLE_I.lambda_m, t_s=db_to_linear(bias))
    a = association(AssocQuery(direction, criterion), p)
    assert 0 <= a.p_mcell <= 1
    assert abs(a.p_mcell + a.p_scell - 1) < 1e-12


@settings(max_examples=20, deadline=None)
@given(r1=ratios, r2=ratios, direction=st.sampled_from(list(Direction)))
def test_more_scells_attract_more_users(r1, r2, direction):
    lo, hi = sorted((r1, r2))
    q = AssocQuery(direction, Criterion.MAX_BRP)
    p = TABLE_I.replace(lambda_s=lo * TABLE_I.lambda_m)
    assert association(q, p.replace(lambda_s=hi * TABLE_I.lambda_m)).p_scell >= association(q, p).p_scell - 1e-9


@settings(max_examples=40, deadline=None)
@given(tau=st.floats(min_value=1e-3, max_value=1e4), scale=st.floats(min_value=1.01, max_value=10.0),
       alpha=st.floats(min_value=2.2, max_value=6.0))
def test_rho_positive_and_increasing(tau, scale, alpha):
    assert 0 < rho(tau, alpha) < rho(tau * scale, alpha)


@settings(max_examples=10, deadline=None)
@given(t1=st.floats(min_value=-10, max_value=30), t2=st.floats(min_value=-10, max_value=30),
       direction=st.sampled_from(list(Direction)))
def test_sinr_coverage_decreases_with_threshold(t1, t2, direction):
    lo, hi = sorted((t1, t2))
    a = sinr_coverage(direction, TABLE_I, db_to_linear(lo)).total
    b = sinr_coverage(direction, TABLE_I, db_to_linear(hi)).total
    assert 0 <= b <= a + 1e-12 <= 1 + 1e-12


@given(values=st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=50),
       xs=st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=10))
def test_empirical_ccdf_is_a_ccdf(values, xs):
    xs = sorted(xs)
    p, _ = empirical_ccdf(np.array(values), np.array(xs))
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.diff(p) <= 0)
