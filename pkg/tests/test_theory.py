import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from blindcomm.errors import AssumptionViolatedError
from blindcomm.graph_filter import FilterSpec, diffusion_filter
from blindcomm.graph_model import PartitionIndicator, PpmParams
from blindcomm.order_selection import mdl_curve
from blindcomm.theory import (FilterConstants, MomentParams, adjacency_constants, adjacency_moments,
                              analytic_covariance, analytic_spectrum, constants_from_moments,
                              gamma_power_inequality_check, gap_condition_threshold,
                              kmeans_cost_lower_bound, mdl_of_true_spectrum, mdl_penalty,
                              mdl_underfit_margin, moment_classes, monte_carlo_constants,
                              monte_carlo_moments, sample_bounds, single_mislabel_cost)
from oracles import FROZEN, adjacency_constants_closed_form

EXAMPLE = FilterConstants(13.0, 5.0, 30.0, 100, 2)


@st.composite
def assumption_constants(draw):
    """Random (c1, c2, c3, n, k) with c3 > c1 > c2 >= 0 and k | n."""
    k = draw(st.integers(1, 6))
    n = k * draw(st.integers(2, 40))
    c2 = draw(st.floats(0, 10))
    c1 = c2 + draw(st.floats(0.01, 10))
    c3 = c1 + draw(st.floats(0.01, 10))
    return FilterConstants(c1, c2, c3, n, k)


# --- moments and constants ----------------------------------------------

def test_adjacency_constants_05_01():
    c = constants_from_moments(adjacency_moments(0.5, 0.1), 100, 2)
    assert (c.c1, c.c2, c.c3) == pytest.approx(FROZEN["adjacency_constants_05_01"], rel=1e-14)


def test_adjacency_moment_values():
    p = adjacency_moments(0.5, 0.1)
    assert p.as_array() == pytest.approx([0.5, 0.5, 0.1, 0.25, 0.05, 0.25, 0.01, 0.05, 0.01])
    assert adjacency_moments(0.0, 0.0).as_array().tolist() == [0.0] * 9
    q = adjacency_moments(0.3, 0.3)
    assert q.p4 == q.p5 and q.p6 == q.p7 == q.p8 == q.p9


def test_zero_moments_give_zero_constants():
    c = constants_from_moments(MomentParams(*([0.0] * 9)), 12, 3)
    assert (c.c1, c.c2, c.c3) == (0, 0, 0)


def test_equal_probabilities_collapse_c1_c2():
    c = adjacency_constants(PpmParams.from_probabilities(30, 3, 0.2, 0.2))
    assert c.c1 == pytest.approx(c.c2)
    assert not c.assumption_holds()


@given(st.integers(1, 8), st.integers(1, 30), st.floats(0, 1), st.floats(0, 1))
def test_constants_match_closed_forms(k, s, pin, pout):
    n = k * s
    c = constants_from_moments(adjacency_moments(pin, pout), n, k)
    ref = adjacency_constants_closed_form(n, k, pin, pout)
    np.testing.assert_allclose((c.c1, c.c2, c.c3), ref, rtol=1e-12, atol=1e-300)


def test_assumption_on_probability_grid():
    grid = np.linspace(0.05, 0.95, 19)
    for pin in grid:
        for pout in grid:
            c = adjacency_constants(PpmParams.from_probabilities(60, 3, pin, pout))
            assert c.assumption_holds() == (not math.isclose(pin, pout))


def test_moment_classes_partition_triples():
    labels = PartitionIndicator.equal(9, 3)
    cls = moment_classes(labels)
    counts = np.bincount(cls.ravel(), minlength=9)
    assert counts.sum() == 9**3
    # i=j=l: n; i=j, l in same group: n(s-1); i=j, l elsewhere: n(n-s)
    assert counts[:3].tolist() == [9, 18, 54]


@pytest.mark.parametrize("coeff", [1.0, 2.5, -0.7])
def test_constant_filter_moments(coeff):
    params = PpmParams.from_probabilities(9, 3, 0.5, 0.2)
    est = monte_carlo_moments(FilterSpec((coeff,), "adjacency"), params, 5, 0)
    np.testing.assert_allclose(est.mean, [coeff**2] + [0.0] * 8, atol=1e-15)


@pytest.mark.slow
def test_monte_carlo_moments_small_model():
    params = PpmParams.from_probabilities(9, 3, 0.5, 0.1)
    est = monte_carlo_moments(FilterSpec((0.0, 1.0), "adjacency"), params, 4000, 1)
    ref = adjacency_moments(0.5, 0.1).as_array()
    z = np.abs(est.mean - ref) / np.maximum(est.stderr, 1e-15)
    assert np.all(z <= 4), z


def test_unrealizable_classes_flagged():
    params = PpmParams.from_probabilities(4, 2, 0.5, 0.1)
    est = monte_carlo_moments(FilterSpec((0.0, 1.0), "adjacency"), params, 3, 0)
    # blocks of two nodes cannot host three distinct same-group nodes; k=2 has no third group
    assert not est.realizable[5] and not est.realizable[8]
    assert np.isnan(est.mean[5])
    with pytest.raises(ValueError):
        monte_carlo_moments(FilterSpec((0.0, 1.0), "adjacency"), params, 3, 0, strict=True)


@pytest.mark.slow
def test_monte_carlo_constants_match_closed_form():
    params = PpmParams.from_probabilities(40, 2, 0.5, 0.1)
    c = monte_carlo_constants(FilterSpec((0.0, 1.0), "adjacency"), params, 400, 3, self_loops=True)
    ref = adjacency_constants(params)
    np.testing.assert_allclose((c.c1, c.c2, c.c3), (ref.c1, ref.c2, ref.c3), rtol=0.03)


def test_monte_carlo_constants_diffusion_assumption():
    params = PpmParams(100, 2, 4 * math.log(100), 0.3 * 4 * math.log(100))
    c = monte_carlo_constants(diffusion_filter(0.3, 100), params, 50, 0)
    assert c.assumption_holds()


# --- covariance and spectrum --------------------------------------------

def test_analytic_covariance_small():
    c = analytic_covariance(FilterConstants(13, 5, 30, 4, 2), PartitionIndicator.equal(4, 2))
    np.testing.assert_array_equal(c, [[30, 13, 5, 5], [13, 30, 5, 5], [5, 5, 30, 13], [5, 5, 13, 30]])


def test_analytic_covariance_all_ones():
    c = analytic_covariance(FilterConstants(1, 1, 1, 6, 3), PartitionIndicator.equal(6, 3))
    np.testing.assert_array_equal(c, np.ones((6, 6)))


def test_analytic_covariance_single_block():
    c = analytic_covariance(FilterConstants(2, 99, 5, 4, 1), PartitionIndicator.equal(4, 1))
    np.testing.assert_array_equal(c, 3 * np.eye(4) + 2 * np.ones((4, 4)))


def test_adjacency_spectrum_05_01():
    spec = analytic_spectrum(EXAMPLE)
    values, mults = FROZEN["adjacency_spectrum_05_01"]
    assert spec.values == pytest.approx(values, rel=1e-14)
    assert spec.multiplicities == mults


def test_zero_cross_constant_merges_top_eigenvalues():
    spec = analytic_spectrum(FilterConstants(2.0, 0.0, 5.0, 12, 3))
    assert spec.values[0] == spec.values[1]
    assert spec.distinct() == [(11.0, 3), (3.0, 9)]


def test_spectrum_warns_without_assumption():
    with pytest.warns(RuntimeWarning):
        analytic_spectrum(FilterConstants(5.0, 5.0, 6.0, 4, 2))


@given(assumption_constants())
def test_numeric_eigenvalues_match_spectrum(c):
    vals = np.linalg.eigvalsh(analytic_covariance(c, PartitionIndicator.equal(c.n, c.k)))[::-1]
    expected = analytic_spectrum(c).full()
    np.testing.assert_allclose(vals, expected, rtol=1e-8, atol=1e-8 * expected[0])


def test_sample_bounds_example():
    assert sample_bounds(EXAMPLE) == pytest.approx((1 / 289, 1 / 64))


def test_sample_bounds_monotone_and_errors():
    gaps = [8, 4, 2, 1, 0.5]
    parts = [sample_bounds(FilterConstants(5 + g, 5, 30, 100, 2))[1] for g in gaps]
    assert all(a < b for a, b in zip(parts, parts[1:]))
    with pytest.raises(AssumptionViolatedError):
        sample_bounds(FilterConstants(30, 5, 30, 100, 2))


# --- order-selection identities -----------------------------------------

def test_mdl_true_spectrum_example():
    assert mdl_of_true_spectrum(EXAMPLE, 2, 1000) == pytest.approx(FROZEN["mdl_penalty_100_2_1000"], abs=5e-6)
    assert mdl_of_true_spectrum(EXAMPLE, 2, 1000) < mdl_of_true_spectrum(EXAMPLE, 3, 1000)
    assert mdl_of_true_spectrum(EXAMPLE, 1, 1000) > mdl_of_true_spectrum(EXAMPLE, 2, 1000)


@given(assumption_constants(), st.integers(2, 10**6))
def test_closed_form_matches_curve_on_full_spectrum(c, m):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        curve = mdl_curve(analytic_spectrum(c).full(), m)
    for p in range(1, c.n + 1):
        assert mdl_of_true_spectrum(c, p, m) == pytest.approx(curve[p - 1], rel=1e-9, abs=1e-9)


@given(assumption_constants(), st.integers(2, 10**6))
def test_underfit_margin_identity(c, m):
    if c.k < 2:
        return
    diff = mdl_of_true_spectrum(c, c.k - 1, m) - mdl_of_true_spectrum(c, c.k, m)
    assert mdl_underfit_margin(c, m) == pytest.approx(diff, rel=1e-9, abs=1e-9)


def test_penalty_formula():
    assert mdl_penalty(2, 100, 1000) == pytest.approx(0.5 * 2 * 198 * math.log(1000) / 1000)


# --- inequalities and bounds --------------------------------------------

def test_gamma_inequality_examples():
    assert gamma_power_inequality_check(2.0, 0.5)
    assert not gamma_power_inequality_check(3.0, 0.0)
    with pytest.raises(ValueError):
        gamma_power_inequality_check(1.0, 0.5)
    with pytest.raises(ValueError):
        gamma_power_inequality_check(2.0, 1.0)


@given(st.floats(1.0001, 1e3), st.floats(1e-6, 1 - 1e-6))
def test_gamma_inequality_property(gamma, x):
    assert gamma_power_inequality_check(gamma, x)


def test_kmeans_lower_bound_values():
    assert kmeans_cost_lower_bound(100, 2) == pytest.approx(FROZEN["mislabel_bound_100_2"], rel=1e-15)
    assert kmeans_cost_lower_bound(10**9, 2) < 1e-8
    with pytest.raises(ValueError):
        kmeans_cost_lower_bound(10, 3)


@given(st.integers(2, 500))
def test_single_mislabel_equal_blocks(s):
    assert single_mislabel_cost(s, s) == pytest.approx(2 / (s + 1), rel=1e-14)


def test_gap_condition_threshold_example():
    expected = 50 * 8 / (1 + math.sqrt(2 * 102))
    assert gap_condition_threshold(EXAMPLE) == pytest.approx(expected)


def test_rho():
    assert EXAMPLE.rho == pytest.approx(8 / (2 * 17))
