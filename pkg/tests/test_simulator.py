import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from analytics.bounded_risk import BoundedStoragePolicy, p_risk, risk_report
from analytics.exact_exponential import expected_makespan_chunk
from analytics.firstorder_waste import period_firstorder
from analytics.patterns import PatternMode, RollbackStrategy, WasteVariant, build_spec, pattern_waste
from conftest import make_params
from schema.models import WorkloadSpec
from simulation.base_trial import BaseTrialModel, ErrorClock
from simulation.rng import rng_stream
from simulation.simulator import BoundedStorageModel, PatternModel, SimConfig, simulate
from utils.errors import ParameterDomainError, SimulationRunawayError


def _chunk_config(params, trials, seed=20140519, work=5400.0):
    return SimConfig(model=BoundedStorageModel(period=work + params.checkpoint_cost),
                     workload=WorkloadSpec(total_work=work), params=params, trials=trials, seed=seed)


# =============================================================================
# ZUFALLSSTRÖME UND HILFSKLASSEN
# =============================================================================

def test_rng_streams_are_reproducible_and_distinct():
    assert rng_stream(1, 0).random(4).tolist() == rng_stream(1, 0).random(4).tolist()
    assert rng_stream(1, 0).random(4).tolist() != rng_stream(1, 1).random(4).tolist()
    assert rng_stream(1, 0).random(4).tolist() != rng_stream(2, 0).random(4).tolist()
    with pytest.raises(ValueError):
        rng_stream(-1, 0)
    with pytest.raises(ValueError):
        rng_stream(1, -1)


def test_error_clock_skip_and_pause():
    draws = iter([1.0, 2.0, 3.0, 4.0])
    clock = ErrorClock(lambda: next(draws))
    assert clock.next == 1.0
    assert clock.skip_past(3.0) == 2
    assert clock.next == 6.0
    clock.pause(10.0)
    assert clock.next == 16.0


def test_split_work_keeps_total():
    pieces = BaseTrialModel.split_work(1000.0, 300.0)
    assert pieces[:3] == [300.0, 300.0, 300.0]
    assert math.fsum(pieces) == pytest.approx(1000.0)
    assert BaseTrialModel.split_work(900.0, 300.0) == [300.0, 300.0, 300.0]


# =============================================================================
# BEGRENZTER SPEICHER
# =============================================================================

def test_failure_free_run_equals_deterministic_makespan(ten_days):
    params = make_params(mu_e=1e15, mu_d=1.0)
    config = SimConfig(model=BoundedStorageModel(period=6000.0, k=3), workload=ten_days, params=params,
                       trials=5)
    result = simulate(config)
    assert result.failure_free_makespan == pytest.approx(960000.0)
    assert result.mean_makespan == result.failure_free_makespan
    assert result.waste_mean == pytest.approx(0.1, rel=1e-12)
    assert result.errors_total == 0
    assert result.irrecoverable_frequency == 0.0


def test_results_independent_of_worker_count(scenario_a):
    config = _chunk_config(scenario_a, trials=40)
    serial = simulate(config, workers=1, keep_trials=True)
    parallel = simulate(config, workers=2, keep_trials=True)
    assert serial.mean_makespan == parallel.mean_makespan
    assert serial.errors_total == parallel.errors_total
    assert serial.per_trial["makespan"].tolist() == parallel.per_trial["makespan"].tolist()


def test_neighbouring_seeds_share_distribution(scenario_a):
    first = simulate(_chunk_config(scenario_a, trials=400, seed=7), keep_trials=True)
    second = simulate(_chunk_config(scenario_a, trials=400, seed=8), keep_trials=True)
    assert first.per_trial["makespan"].tolist() != second.per_trial["makespan"].tolist()
    assert stats.ks_2samp(first.per_trial["makespan"], second.per_trial["makespan"]).pvalue > 0.001


def test_single_chunk_matches_exact_expectation(scenario_a):
    result = simulate(_chunk_config(scenario_a, trials=4000))
    analytic = expected_makespan_chunk(5400.0, scenario_a)
    assert abs(result.mean_makespan - analytic) <= 4 * result.makespan_stderr


def test_unbounded_storage_is_never_irrecoverable(scenario_b, ten_days):
    config = SimConfig(model=BoundedStorageModel(period=2000.0), workload=ten_days, params=scenario_b,
                       trials=50)
    result = simulate(config)
    assert result.irrecoverable_count == 0
    assert result.detections_total > 0


def test_attempts_bounded_by_expected_executions(scenario_b, ten_days):
    period = period_firstorder(scenario_b)
    config = SimConfig(model=BoundedStorageModel(period=period, k=3), workload=ten_days, params=scenario_b,
                       trials=200)
    result = simulate(config, keep_trials=True)
    report = risk_report(period, BoundedStoragePolicy(k=3, epsilon=0.5), ten_days, scenario_b)
    attempts = result.per_trial["attempts"]
    stderr = attempts.std(ddof=1) / math.sqrt(len(attempts))
    assert result.irrecoverable_count > 0
    assert result.mean_attempts <= report.expected_executions + 4 * stderr
    assert result.irrecoverable_count == result.attempts_total - result.trials


def test_runaway_guard_stops_hopeless_run():
    params = make_params(c=60.0, r=60.0, mu_e=300.0, mu_d=60.0)
    config = SimConfig(model=BoundedStorageModel(period=6000.0), workload=WorkloadSpec(total_work=5940.0),
                       params=params, trials=3, seed=11, max_sim_time=60000.0)
    with pytest.raises(SimulationRunawayError) as info:
        simulate(config)
    assert info.value.seed == 11
    assert info.value.max_sim_time == 60000.0
    assert info.value.exit_code == 4


def test_runaway_limit_must_cover_failure_free_run(scenario_a):
    with pytest.raises(ValidationError):
        SimConfig(model=BoundedStorageModel(period=6000.0), workload=WorkloadSpec(total_work=5400.0),
                  params=scenario_a, max_sim_time=59999.0)


def test_period_must_exceed_checkpoint(scenario_a):
    config = SimConfig(model=BoundedStorageModel(period=600.0), workload=WorkloadSpec(total_work=5400.0),
                       params=scenario_a, trials=1)
    with pytest.raises(ParameterDomainError):
        config.build_trial_model()


# =============================================================================
# MUSTER
# =============================================================================

def _pattern_config(spec, params, patterns, trials, seed=20140519):
    work = patterns * (spec.period - spec.fixed_cost(params))
    return SimConfig(model=PatternModel(pattern=spec), workload=WorkloadSpec(total_work=work), params=params,
                     trials=trials, seed=seed)


def test_pattern_runs_are_never_irrecoverable(pattern_params):
    params = pattern_params(v=100.0, c=6.0)
    for rollback in RollbackStrategy:
        spec = build_spec(PatternMode.CHECKPOINT_HEAVY, 3, 900.0, rollback=rollback)
        result = simulate(_pattern_config(spec, params, patterns=50, trials=50))
        assert result.irrecoverable_count == 0
        assert result.detections_total > 0
        assert result.mean_attempts == 1.0


def test_pattern_failure_free_makespan(pattern_params):
    params = pattern_params(v=20.0, c=600.0)
    spec = build_spec(PatternMode.VERIFICATION_HEAVY, 4, 2000.0)
    config = _pattern_config(spec, params, patterns=10, trials=1)
    assert config.build_trial_model().failure_free_makespan == pytest.approx(20000.0)


def test_verification_heavy_simulation_follows_averaged_variant():
    params = make_params(c=60.0, r=60.0, mu_e=2e5, v=10.0)
    spec = build_spec(PatternMode.VERIFICATION_HEAVY, 2, 4619.0)
    result = simulate(_pattern_config(spec, params, patterns=100, trials=400))
    averaged = pattern_waste(spec.model_copy(update={"variant": WasteVariant.AVERAGED}), params).waste_total
    published = pattern_waste(spec, params).waste_total
    assert averaged == pytest.approx(0.0344, abs=5e-4)
    assert published == pytest.approx(0.0258, abs=5e-4)
    assert abs(result.waste_mean - averaged) < abs(result.waste_mean - published)


def test_checkpoint_heavy_simulation_matches_linear_rollback():
    params = make_params(c=6.0, r=6.0, mu_e=1e5, v=100.0)
    spec = build_spec(PatternMode.CHECKPOINT_HEAVY, 2, 3864.0)
    result = simulate(_pattern_config(spec, params, patterns=200, trials=300))
    analytic = pattern_waste(spec, params).waste_total
    assert abs(result.waste_mean - analytic) <= max(0.01, 4 * result.waste_stderr)



# =============================================================================
# STATISTISCHE KONVERGENZ
# =============================================================================

@pytest.mark.slow
def test_waste_stderr_shrinks_with_square_root_of_trials(scenario_a):
    errors = [simulate(_chunk_config(scenario_a, trials=trials, seed=31), workers=4).waste_stderr
              for trials in (10_000, 100_000, 1_000_000)]
    for larger, smaller in zip(errors, errors[1:]):
        assert larger / smaller == pytest.approx(math.sqrt(10.0), rel=0.2)


@pytest.mark.slow
def test_expected_executions_follow_geometric_law(scenario_b):
    # hohes Risiko: k = 2 bei T_opt, ein Tag Arbeit
    period = period_firstorder(scenario_b)
    workload = WorkloadSpec(total_work="1d")
    policy = BoundedStoragePolicy(k=2, epsilon=1e-4)
    config = SimConfig(model=BoundedStorageModel(period=period, k=2), workload=workload, params=scenario_b,
                       trials=4000, seed=5)
    result = simulate(config, workers=4, keep_trials=True)
    analytic = risk_report(period, policy, workload, scenario_b)
    assert result.irrecoverable_count > 100

    # Risiko einer Ausführung aus dem jeweils ersten Versuch, zurück auf p_irrec pro Periode
    trials = len(result.per_trial)
    first_failed = float((result.per_trial["irrecoverable"] > 0).mean())
    n = analytic.chunk_count
    irrec_sim = -math.expm1(math.log1p(-first_failed) / n)
    risk_sim = p_risk(irrec_sim, n)
    assert risk_sim == pytest.approx(first_failed, rel=1e-9)
    expected = 1.0 / (1.0 - risk_sim)

    attempts = result.per_trial["attempts"].to_numpy()
    sigma_attempts = np.std(attempts, ddof=1) / math.sqrt(trials)
    sigma_expected = math.sqrt(first_failed * (1.0 - first_failed) / trials) / (1.0 - first_failed) ** 2
    sigma = math.hypot(sigma_attempts, sigma_expected)
    assert abs(result.mean_attempts - expected) <= 3.0 * sigma
    # p_lat ist eine obere Schranke
    assert analytic.expected_executions >= result.mean_attempts - 4.0 * sigma
