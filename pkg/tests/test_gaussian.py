import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from countdp.gaussian import (
    CSV_HEADER,
    compare_mechanisms,
    discrete_gaussian_pmf,
    gaussian_delta,
    rows_to_csv,
    truncation_for,
)
from countdp.optimal import optimal_alphas
from countdp.oracle import event_delta, smallest_epsilon


def test_matched_variance_masses(worked_config):
    sigma2 = optimal_alphas(worked_config).variance
    g = discrete_gaussian_pmf(sigma2)
    assert g[1] == pytest.approx(0.11685, abs=5e-5)
    assert g[-1] == g[1]
    assert g[2] == pytest.approx(0.000416, abs=2e-5)
    assert g.tail_mass_outside(6) < 1e-30


@given(st.floats(min_value=0.05, max_value=50.0))
def test_pmf_normalized_and_symmetric(sigma2):
    g = discrete_gaussian_pmf(sigma2)
    assert g.probs.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(g.probs, g.probs[::-1])
    assert g.truncation == truncation_for(sigma2)


def test_realized_variance_close_for_wide_pmf():
    assert discrete_gaussian_pmf(25.0).variance() == pytest.approx(25.0, rel=1e-9)
    assert discrete_gaussian_pmf(0.3).variance() < 0.3


def test_rejects_nonpositive_sigma():
    with pytest.raises(ValueError):
        discrete_gaussian_pmf(0.0)


def test_delta_formula_matches_event_audit():
    # the closed form is the all-events delta of the shifted pair
    g = discrete_gaussian_pmf(1.5)
    m = g.matrix(range(0, 3))
    for eps in (0.0, 0.2, 0.8, 1.5, 3.0):
        assert gaussian_delta(eps, 1.5, g) == pytest.approx(event_delta(m, eps), abs=1e-12)


def test_delta_floor_and_limits():
    g = discrete_gaussian_pmf(2.0)
    # at eps = 0 it is the total variation between Z and Z + 1
    tv = 0.5 * sum(abs(g[z] - g[z - 1]) for z in range(-20, 21))
    assert gaussian_delta(0.0, 2.0) == pytest.approx(tv, abs=1e-12)
    assert gaussian_delta(60.0, 2.0) == 0.0
    d = [gaussian_delta(e, 1.0) for e in np.linspace(0.05, 5, 50)]
    assert all(x >= 0 for x in d)


def test_bisected_epsilons(worked_config):
    sol = optimal_alphas(worked_config)
    g = discrete_gaussian_pmf(sol.variance)
    eps_g = smallest_epsilon(lambda e: gaussian_delta(e, sol.variance, g), 0.0049)
    assert eps_g == pytest.approx(5.6, abs=0.05)


def test_dominance_region():
    rows = compare_mechanisms(0.5, 6, np.linspace(1.2, 3.0, 19))
    assert all(r.our_dp_delta < r.gaussian_delta for r in rows)


def test_csv_schema():
    text = rows_to_csv(compare_mechanisms(0.5, 6, [1.0, 2.0]))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER) == "epsilon,our_dp_delta,gaussian_delta,sigma2,regime"
    assert len(lines) == 3
    with pytest.raises(ValueError):
        compare_mechanisms(0.5, 6, [])


