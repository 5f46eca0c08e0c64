import numpy as np
import pytest

from countdp.noise_family import MechanismConfig, NoisePmf, make_elementary_pmf
from countdp.optimal import optimal_alphas, solve
from countdp.sampler import (
    RNG_NAME,
    SamplerState,
    audit_pmf,
    draw_histogram,
    empirical_audit,
    empirical_singular_delta,
    sample_output,
    sample_outputs,
)


def test_eta_frequency(worked_config):
    pmf = optimal_alphas(worked_config).noise_pmf()
    rep = audit_pmf(pmf, 10**6, window=3, seed=3)
    assert rep.empirical_correct_rate == pytest.approx(0.8, abs=2e-3)
    assert rep.tv_distance < 5e-3
    assert sum(rep.empirical_mass.values()) == pytest.approx(1.0)


def test_in_range_rate():
    rep = empirical_audit(MechanismConfig(eta=0.5, D=8, epsilon=1.5), n=10, trials=10**6, window=3)
    assert rep.analytic_in_range == pytest.approx(0.9945, abs=5e-4)
    assert rep.in_range_rate == pytest.approx(0.9945, abs=2e-3)
    assert rep.rng == RNG_NAME


def test_hand_masses(hand_config):
    rep = audit_pmf(optimal_alphas(hand_config).noise_pmf(), 10**6, window=1, seed=9)
    for z, p in {-2: 0.05, -1: 0.2, 0: 0.5, 1: 0.2, 2: 0.05}.items():
        assert rep.empirical_mass[z] == pytest.approx(p, abs=2e-3)


def test_point_mass_pmf():
    # eta close to 1 puts almost everything on zero; a literal point mass is below
    pmf = NoisePmf(n=1, eta=0.999999, D=1, lo=-1, probs=np.array([5e-7, 0.999999, 5e-7]))
    rep = audit_pmf(pmf, 10**4, window=0)
    assert rep.tv_distance < 1e-3


def test_determinism_and_streams(worked_config):
    pmf = optimal_alphas(worked_config).noise_pmf()
    a = SamplerState(pmf, seed=42)
    b = SamplerState(pmf, seed=42)
    np.testing.assert_array_equal(sample_outputs(7, pmf, a, 1000), sample_outputs(7, pmf, b, 1000))
    h1 = draw_histogram(pmf, 50_000, seed=1, streams=4)
    h2 = draw_histogram(pmf, 50_000, seed=1, streams=4)
    np.testing.assert_array_equal(h1, h2)
    assert h1.sum() == 50_000


def test_hard_support():
    pmf = solve(0.2, 3, 0.5).noise_pmf()
    st = SamplerState(pmf, seed=0)
    y = sample_outputs(5, pmf, st, 100_000)
    assert y.min() >= 2 and y.max() <= 8
    assert isinstance(sample_output(5, pmf, st), int)


def test_rejects_bad_use():
    pmf = solve(0.5, 3, 1.0).noise_pmf()
    st = SamplerState(pmf)
    with pytest.raises(ValueError):
        sample_outputs(1, pmf, st, 10)
    with pytest.raises(ValueError):
        sample_outputs(5, make_elementary_pmf(5, -1, 1, 0.5, 3), st, 10)
    with pytest.raises(ValueError):
        SamplerState(NoisePmf(n=1, eta=0.5, D=1, lo=-1, probs=np.array([0.3, 0.5, 0.2])))
    with pytest.raises(ValueError):
        empirical_audit(MechanismConfig(eta=0.5, D=3, epsilon=1.0), n=2, trials=100, window=1)


def test_empirical_singular_delta(worked_config):
    sol = optimal_alphas(worked_config)
    est, se = empirical_singular_delta(sol.noise_pmf(), worked_config.epsilon, 10**7, seed=0)
    assert abs(est - sol.delta_star) < 3 * se


def test_report_json(worked_config):
    rep = audit_pmf(optimal_alphas(worked_config).noise_pmf(), 1000, window=2)
    d = rep.to_json_dict()
    assert set(d["empirical_mass"]) == {str(z) for z in range(-6, 7)}
