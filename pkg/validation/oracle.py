"""
Abgleich analytischer Werte mit dem Simulator ("validate").

Für jedes Modell, für das das Szenario die nötigen Felder enthält, wird eine
passende Simulation gerechnet und die Abweichung gegen die Toleranz geprüft.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import config.config as cfg
from analytics.bounded_risk import recommend_period, risk_report, waste_optimal_period
from analytics.exact_exponential import expected_makespan_chunk
from analytics.firstorder_waste import waste_general
from analytics.patterns import PatternMode, WasteVariant, optimize_pattern, pattern_waste, waste_fail_kv1c
from schema.models import LawFamily, WorkloadSpec
from schema.scenario import Scenario
from simulation.simulator import BoundedStorageModel, PatternModel, SimConfig, simulate
from utils.errors import ScenarioError

logger = logging.getLogger(__name__)


@dataclass
class OracleCheck:
    name: str
    analytic: float
    simulated: float
    stderr: float
    tolerance: float
    passed: bool
    note: Optional[str] = None

    @property
    def delta(self) -> float:
        return self.simulated - self.analytic


class OracleRunner:
    """Führt die Prüfungen mit gemeinsamer Lauf-Anzahl, Seed und Worker-Zahl aus."""

    def __init__(self, scenario: Scenario, trials: int, seed: int, workers: int = cfg.DEFAULT_WORKERS):
        self.scenario = scenario
        self.trials = trials
        self.seed = seed
        self.workers = workers
        self.sigma = cfg.VALIDATION_TOLERANCES["sigma"]
        self._offset = 0

    def _simulate(self, model, total_work: float):
        request = self.scenario.simulation
        config = SimConfig(
            model=model,
            workload=WorkloadSpec(total_work=total_work),
            params=self.scenario.platform,
            error_law=self.scenario.error_law(),
            detection_law=self.scenario.detection_law(),
            trials=self.trials,
            # jede Prüfung bekommt eigene Ströme
            seed=(self.seed + self._offset) % 2 ** 64,
            max_sim_time=request.max_sim_time if request is not None else None,
        )
        self._offset += 1
        return simulate(config, workers=self.workers)

    # =========================================================================
    # EINZELNE PRÜFUNGEN
    # =========================================================================

    def check_chunk_makespan(self) -> OracleCheck:
        """Ein einzelner Chunk, unbegrenzter Speicher: exakter Erwartungswert."""
        params = self.scenario.platform
        period = recommend_or_optimal_period(self.scenario)
        work = period - params.checkpoint_cost
        analytic = expected_makespan_chunk(work, params)
        result = self._simulate(BoundedStorageModel(period=period, k=None), work)
        tolerance = self.sigma * result.makespan_stderr
        return OracleCheck("chunk_makespan", analytic, result.mean_makespan, result.makespan_stderr,
                           tolerance, abs(result.mean_makespan - analytic) <= tolerance)

    def check_firstorder_waste(self, workload: WorkloadSpec) -> OracleCheck:
        params = self.scenario.platform
        report = waste_general(recommend_or_optimal_period(self.scenario), params)
        result = self._simulate(BoundedStorageModel(period=report.period, k=None), workload.total_work)
        tolerance = max(cfg.VALIDATION_TOLERANCES["waste_firstorder"], self.sigma * result.waste_stderr)
        return OracleCheck("waste_firstorder", report.waste_total, result.waste_mean, result.waste_stderr,
                           tolerance, abs(result.waste_mean - report.waste_total) <= tolerance)

    def check_risk_bound(self, workload: WorkloadSpec) -> OracleCheck:
        """Einseitig: die analytische Schranke darf die Simulation nicht unterschätzen."""
        policy = self.scenario.policy
        params = self.scenario.platform
        period = policy.period
        if period is None:
            period = recommend_period(policy, workload, params).recommended
        analytic = risk_report(period, policy, workload, params).p_risk
        result = self._simulate(BoundedStorageModel(period=period, k=policy.k), workload.total_work)
        stderr = result.irrecoverable_stderr
        tolerance = self.sigma * stderr
        return OracleCheck("risk_bound", analytic, result.irrecoverable_frequency, stderr,
                           tolerance, result.irrecoverable_frequency <= analytic + tolerance,
                           note=f"T={period!r}s, k={policy.k}, einseitig")

    def check_pattern_waste(self, workload: WorkloadSpec) -> OracleCheck:
        request = self.scenario.pattern
        params = self.scenario.platform
        if request.is_search:
            optimum = optimize_pattern(request.mode, params, request.k_max, request.rollback, request.variant)
            spec = request.to_spec(k=optimum.k_opt, period=optimum.s_opt)
        else:
            spec = request.to_spec()
        analytic = pattern_waste(spec, params).waste_total
        result = self._simulate(PatternModel(pattern=spec), workload.total_work)
        tolerance = max(cfg.VALIDATION_TOLERANCES["waste_pattern"], self.sigma * result.waste_stderr)
        note = f"{spec.mode.value}, k={spec.k}, S={spec.period!r}s"
        if spec.mode is PatternMode.VERIFICATION_HEAVY:
            # beide Varianten berichten, geprüft wird die angeforderte
            other = (WasteVariant.AVERAGED if spec.variant is WasteVariant.PUBLISHED
                     else WasteVariant.PUBLISHED)
            other_fail = waste_fail_kv1c(spec, params, other)
            waste_ff = spec.fixed_cost(params) / spec.period
            other_total = other_fail + waste_ff - other_fail * waste_ff
            note += f", {spec.variant.value}; {other.value}: {other_total!r}"
        if result.post_verification_errors:
            note += f", Fehler im Checkpoint nach Verifikation: {result.post_verification_errors}"
        return OracleCheck("waste_pattern", analytic, result.waste_mean, result.waste_stderr,
                           tolerance, abs(result.waste_mean - analytic) <= tolerance, note=note)

    def run(self) -> List[OracleCheck]:
        scenario = self.scenario
        workload = scenario.require("workload", "validate")
        checks: List[OracleCheck] = []

        has_latency = scenario.platform.detection_rate is not None
        exponential = scenario.distributions.error_law.family is LawFamily.EXPONENTIAL
        if has_latency and exponential:
            checks.append(self.check_chunk_makespan())
        elif has_latency:
            logger.warning("Exakter Chunk-Vergleich übersprungen: nur für Exponentialverteilung")
        if has_latency:
            checks.append(self.check_firstorder_waste(workload))
        if has_latency and scenario.policy is not None:
            checks.append(self.check_risk_bound(workload))
        if scenario.pattern is not None and scenario.platform.verification_cost is not None:
            checks.append(self.check_pattern_waste(workload))

        if not checks:
            raise ScenarioError("validate: Szenario enthält kein prüfbares Modell "
                                "(detection_rate oder pattern mit verification_cost nötig)")
        for check in checks:
            level = logging.INFO if check.passed else logging.WARNING
            logger.log(level, f"{check.name}: analytisch={check.analytic!r}, simuliert={check.simulated!r}, "
                              f"Toleranz={check.tolerance!r} -> {'OK' if check.passed else 'FEHLER'}")
        return checks


def recommend_or_optimal_period(scenario: Scenario) -> float:
    """Feste Periode der Policy, sonst T_opt erster Ordnung."""
    if scenario.policy is not None and scenario.policy.period is not None:
        return scenario.policy.period
    return waste_optimal_period(scenario.platform)


def run_oracle_checks(scenario: Scenario, trials: int, seed: int,
                      workers: int = cfg.DEFAULT_WORKERS) -> List[OracleCheck]:
    return OracleRunner(scenario, trials, seed, workers).run()
