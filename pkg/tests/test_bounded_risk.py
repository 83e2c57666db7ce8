import math

import numpy as np
import pytest

from analytics.bounded_risk import (NON_EXPONENTIAL_NOTE, BoundedStoragePolicy, p_fail, p_irrec, p_lat, p_risk,
                                    recommend_period, risk_curve, risk_report, solve_t_min)
from analytics.firstorder_waste import period_firstorder
from conftest import MU_E_RISK, make_params
from schema.models import DistributionSpec, LawRole
from utils.errors import InfeasibleRiskError, MissingParameterError, ParameterDomainError


def test_probabilities_at_t_opt(scenario_a):
    assert p_fail(5988.0, scenario_a) == pytest.approx(0.17294, abs=1e-5)
    # exp(-2 * 5988.47 / 1051.2)
    assert p_lat(5988.47, 3, scenario_a) == pytest.approx(1.12675e-5, rel=1e-4)


def test_p_lat_with_single_checkpoint_is_one(scenario_a):
    assert p_lat(5000.0, 1, scenario_a) == 1.0


def test_p_lat_requires_detection():
    with pytest.raises(MissingParameterError):
        p_lat(100.0, 2, make_params())


@pytest.mark.parametrize("call", [lambda p: p_fail(-1.0, p), lambda p: p_lat(1.0, 0, p)])
def test_probabilities_reject_bad_arguments(scenario_a, call):
    with pytest.raises(ParameterDomainError):
        call(scenario_a)


def test_p_irrec_recursion_limits():
    assert p_irrec(0.0, 0.5) == 0.0
    assert p_irrec(0.3, 1.0) == pytest.approx(0.3)
    # jede Periode scheitert, der Fehler wird aber immer rechtzeitig erkannt
    assert p_irrec(1.0, 0.0) == 0.0
    assert p_irrec(0.2, 0.1) == pytest.approx(0.02 / (1 - 0.2 * 0.9))


def test_p_risk_fractional_chunks():
    assert p_risk(0.0, 100.0) == 0.0
    assert p_risk(1.0, 0.5) == 1.0
    assert p_risk(0.01, 2.5) == pytest.approx(1 - 0.99 ** 2.5, rel=1e-14)


def test_scenario_a_risk_exceeds_threshold_at_t_opt(scenario_a, policy_k3, ten_days):
    report = risk_report(period_firstorder(scenario_a), policy_k3, ten_days, scenario_a)
    assert report.p_risk == pytest.approx(3.77e-4, rel=0.01)
    assert report.p_risk > policy_k3.epsilon
    assert report.expected_executions == pytest.approx(1.0 / (1.0 - report.p_risk))
    assert report.note is None


def test_scenario_a_risk_at_8000s(scenario_a, policy_k3, ten_days):
    assert risk_report(8000.0, policy_k3, ten_days, scenario_a).p_risk == pytest.approx(8.3e-6, rel=0.02)


def test_scenario_b_risk_at_t_opt(scenario_b, policy_k3, ten_days):
    report = risk_report(period_firstorder(scenario_b), policy_k3, ten_days, scenario_b)
    assert report.p_risk == pytest.approx(0.536, abs=0.005)


@pytest.mark.parametrize("fixture, low, high", [
    ("scenario_a", 6660.0, 6720.0),
    ("scenario_b", 6600.0, 6680.0),
])
def test_t_min_brackets_threshold(request, policy_k3, ten_days, fixture, low, high):
    params = request.getfixturevalue(fixture)
    t_min = solve_t_min(policy_k3, ten_days, params)
    assert low <= t_min <= high
    assert risk_report(t_min, policy_k3, ten_days, params).p_risk <= policy_k3.epsilon
    assert risk_report(t_min - 1.0, policy_k3, ten_days, params).p_risk > policy_k3.epsilon


def test_recommendation_takes_larger_period(scenario_a, scenario_b, policy_k3, ten_days):
    for params in (scenario_a, scenario_b):
        recommendation = recommend_period(policy_k3, ten_days, params)
        assert recommendation.recommended == max(recommendation.t_min, recommendation.t_opt)
        assert recommendation.recommended == recommendation.t_min
        assert recommendation.p_risk_at_recommended <= policy_k3.epsilon


def test_recommendation_keeps_t_opt_when_risk_is_low(ten_days):
    params = make_params(mu_d=MU_E_RISK / 300.0)
    recommendation = recommend_period(BoundedStoragePolicy(k=3, epsilon=0.1), ten_days, params)
    assert recommendation.recommended == recommendation.t_opt


def test_infeasible_threshold_reports_best_risk(scenario_a, ten_days):
    policy = BoundedStoragePolicy(k=1, epsilon=1e-4)
    with pytest.raises(InfeasibleRiskError) as info:
        solve_t_min(policy, ten_days, scenario_a)
    assert info.value.epsilon == 1e-4
    assert info.value.achieved_risk > 1e-4
    assert info.value.ceiling == pytest.approx(10.0 * MU_E_RISK)


def test_non_exponential_detection_adds_note(scenario_a, policy_k3, ten_days):
    law = DistributionSpec.weibull_with_mean(0.7, MU_E_RISK / 30.0, LawRole.DETECTION_LATENCY)
    report = risk_report(6000.0, policy_k3, ten_days, scenario_a, detection_law=law)
    assert report.note == NON_EXPONENTIAL_NOTE
    assert report.p_lat == pytest.approx(law.frozen_law().sf(12000.0), rel=1e-12)


def test_risk_curve_matches_scalar_reports(scenario_a, policy_k3, ten_days):
    periods = np.array([400.0, 2000.0, 5988.0, 8000.0, 20000.0])
    curve = risk_curve(periods, policy_k3.k, ten_days, scenario_a)
    assert math.isnan(curve["p_risk"][0])
    for index, period in enumerate(periods[1:], start=1):
        report = risk_report(period, policy_k3, ten_days, scenario_a)
        assert curve["p_fail"][index] == pytest.approx(report.p_fail, rel=1e-12)
        assert curve["p_lat"][index] == pytest.approx(report.p_lat, rel=1e-12)
        assert curve["p_risk"][index] == pytest.approx(report.p_risk, rel=1e-10)


def test_policy_validation(ten_days, scenario_a):
    with pytest.raises(ValueError):
        BoundedStoragePolicy(k=3, epsilon=1.0)
    with pytest.raises(ParameterDomainError):
        BoundedStoragePolicy.chunk_count(600.0, ten_days, scenario_a)


@pytest.mark.parametrize("k", [2, 3, 5])
def test_risk_vanishes_for_long_periods(scenario_a, scenario_b, ten_days, k):
    policy = BoundedStoragePolicy(k=k, epsilon=1e-4)
    for params in (scenario_a, scenario_b):
        periods = np.geomspace(period_firstorder(params), 100.0 * params.mu_e, 80)
        risks = np.array([risk_report(float(t), policy, ten_days, params).p_risk for t in periods])
        assert np.all(np.diff(risks) <= 1e-12 * risks[:-1])
        assert risks[-1] < 1e-12


def test_risk_vanishes_for_random_parameters(ten_days):
    rng = np.random.default_rng(17)
    for _ in range(100):
        mu_e = 10 ** rng.uniform(4.0, 6.0)
        params = make_params(c=rng.uniform(1.0, 600.0), r=rng.uniform(0.0, 600.0), mu_e=mu_e,
                             mu_d=mu_e * rng.uniform(0.001, 0.2))
        policy = BoundedStoragePolicy(k=int(rng.integers(2, 7)), epsilon=1e-4)
        assert risk_report(20.0 * mu_e, policy, ten_days, params).p_risk < 1e-12
