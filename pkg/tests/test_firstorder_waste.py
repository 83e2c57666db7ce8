import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from analytics.firstorder_waste import (ValidityFlag, combine_waste, makespan_from_waste, period_firstorder,
                                        waste_curve, waste_general)
from conftest import make_params
from utils.errors import ModelRegimeError, ParameterDomainError


def test_scenario_a_optimum(scenario_a):
    t_opt = period_firstorder(scenario_a)
    assert 95 * 60 <= t_opt <= 105 * 60
    assert t_opt == pytest.approx(5988.47, abs=0.01)
    report = waste_general(t_opt, scenario_a)
    assert 0.22 <= report.waste_total <= 0.25
    assert report.t_opt == t_opt


def test_scenario_b_optimum(scenario_b):
    t_opt = period_firstorder(scenario_b)
    assert t_opt < 35 * 60
    assert 0.09 <= waste_general(t_opt, scenario_b).waste_total <= 0.105


def test_t_opt_minimizes_waste(scenario_a):
    t_opt = period_firstorder(scenario_a)
    numeric = minimize_scalar(lambda t: waste_general(t, scenario_a).waste_total,
                              bounds=(700.0, 30000.0), method="bounded", options={"xatol": 1e-3})
    assert numeric.x == pytest.approx(t_opt, rel=1e-4)


def test_recomposition_identity_everywhere():
    rng = np.random.default_rng(3)
    for _ in range(500):
        mu_e = 10 ** rng.uniform(3.0, 7.0)
        c = rng.uniform(0.0, 0.05 * mu_e)
        params = make_params(c=c, r=rng.uniform(0.0, 0.05 * mu_e), d=rng.uniform(0.0, 0.01 * mu_e),
                             mu_e=mu_e, mu_d=rng.uniform(1.0, 0.1 * mu_e))
        period = c + rng.uniform(1.0, 0.5 * mu_e)
        breakdown = waste_general(period, params).breakdown
        composed = breakdown.waste_fail + breakdown.waste_ff - breakdown.waste_fail * breakdown.waste_ff
        assert breakdown.waste_total == pytest.approx(composed, rel=1e-12, abs=1e-15)


def test_period_must_exceed_checkpoint(scenario_a):
    with pytest.raises(ParameterDomainError):
        waste_general(600.0, scenario_a)


def test_regime_error_when_latency_dominates():
    params = make_params(c=60.0, r=60.0, mu_e=1000.0, mu_d=2000.0)
    with pytest.raises(ModelRegimeError):
        period_firstorder(params)
    # die Verschwendung selbst bleibt auswertbar, nur ohne T_opt
    assert waste_general(500.0, params).t_opt is None


def test_validity_flags(scenario_a):
    report = waste_general(period_firstorder(scenario_a), scenario_a)
    assert ValidityFlag.COSTS_SMALL in report.validity_flags
    assert ValidityFlag.PERIOD_SMALL not in report.validity_flags
    small = waste_general(1000.0, make_params(c=60.0, r=60.0, mu_e=1e6, mu_d=100.0))
    assert small.validity_flags == frozenset({ValidityFlag.COSTS_SMALL, ValidityFlag.PERIOD_SMALL})


def test_waste_curve_matches_pointwise(scenario_b):
    periods = np.array([30.0, 60.0, 500.0, 1910.0, 8000.0])
    curve = waste_curve(periods, scenario_b)
    assert math.isnan(curve[0]) and math.isnan(curve[1])
    for t, w in zip(periods[2:], curve[2:]):
        assert w == pytest.approx(waste_general(t, scenario_b).waste_total, rel=1e-13)


def test_combine_and_makespan():
    assert combine_waste(0.1, 0.2) == pytest.approx(0.28)
    with pytest.raises(ParameterDomainError):
        combine_waste(1.5, 0.0)
    assert makespan_from_waste(100.0, 0.5) == 200.0
    with pytest.raises(ParameterDomainError):
        makespan_from_waste(100.0, 1.0)


def _random_regime_params(rng):
    mu_e = 10 ** rng.uniform(4.0, 7.0)
    return make_params(c=rng.uniform(1.0, 0.01 * mu_e), r=rng.uniform(0.0, 0.01 * mu_e),
                       d=rng.uniform(0.0, 0.005 * mu_e), mu_e=mu_e, mu_d=mu_e * rng.uniform(0.001, 0.05))


def test_t_opt_minimizes_waste_over_random_parameters():
    rng = np.random.default_rng(42)
    for _ in range(100):
        params = _random_regime_params(rng)
        t_opt = period_firstorder(params)
        lo = max(1.001 * params.checkpoint_cost, t_opt / 20.0)
        hi = min(params.mu_e, 20.0 * t_opt)
        numeric = minimize_scalar(lambda t: waste_general(t, params).waste_total, bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-7 * t_opt})
        assert numeric.x == pytest.approx(t_opt, rel=1e-4)
        assert waste_general(t_opt, params).waste_total <= numeric.fun + 1e-15


def test_waste_convex_in_period():
    rng = np.random.default_rng(43)
    for _ in range(20):
        params = _random_regime_params(rng)
        periods = np.geomspace(1.01 * params.checkpoint_cost, params.mu_e, 400)
        waste = waste_curve(periods, params)
        # zweite Differenzen auf dem ungleichmässigen Gitter
        slopes = np.diff(waste) / np.diff(periods)
        assert np.all(np.diff(slopes) >= -1e-12 * np.abs(slopes[1:]).max())
