# Steuerung der Befehle optimize, risk, pattern, simulate, validate
import logging
import math
from enum import Enum
from typing import Any, Dict, List, Optional, TextIO

import numpy as np
from pydantic import ValidationError

import config.config as cfg
from analytics.bounded_risk import RiskReport, recommend_period, risk_curve, risk_report, waste_optimal_period
from analytics.exact_exponential import optimal_chunks, period_daly, period_latency_naive, period_young
from analytics.firstorder_waste import makespan_from_waste, period_firstorder, waste_curve, waste_general
from analytics.patterns import PatternOptimum, optimize_pattern, pattern_grid, pattern_waste
from reporting.emitters import write_csv, write_frame, write_json, write_report
from schema.models import LawFamily
from schema.scenario import Scenario, SweepSpec
from simulation.simulator import BoundedStorageModel, PatternModel, SimConfig, simulate
from utils.errors import InfeasibleRiskError, ModelRegimeError, ResilienceError, ScenarioError
from validation.oracle import run_oracle_checks
from validation.param_gate import ModelFamily, format_validation_errors, validate_params

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INVALID = 2
EXIT_REGIME = 3
EXIT_RUNAWAY = 4
EXIT_VALIDATION = 5

RISK_COLUMNS = ["T", "p_fail", "p_lat", "p_irrec", "p_risk", "waste_total", "kind"]
# Zeilen ohne Marke
RISK_KIND_SWEEP = "sweep"
PATTERN_COLUMNS = ["k", "s_opt", "waste"]
PATTERN_GRID_COLUMNS = ["V", "k", "s_opt", "waste"]
PATTERN_PERIOD_COLUMNS = ["S", "waste_ff", "waste_fail", "waste"]
VALIDATE_COLUMNS = ["check", "analytic", "simulated", "delta", "stderr", "tolerance", "passed"]


class Command(str, Enum):
    OPTIMIZE = "optimize"
    RISK = "risk"
    PATTERN = "pattern"
    SIMULATE = "simulate"
    VALIDATE = "validate"


class CommandController:

    def __init__(self, scenario: Scenario, sink: TextIO, fmt: Optional[str] = None,
                 trials: Optional[int] = None, seed: Optional[int] = None,
                 sweep: Optional[SweepSpec] = None, workers: int = cfg.DEFAULT_WORKERS,
                 report_path: Optional[str] = None):
        """Konstruktor: Szenario, Ausgabeziel und Überschreibungen von der Kommandozeile."""
        self.scenario = scenario
        self.sink = sink
        self.fmt = fmt
        self.trials = trials
        self.seed = seed
        self.sweep = sweep or scenario.sweep
        self.workers = max(1, workers)
        self.report_path = report_path

    # =========================================================================
    # HELPER METHODS
    # =========================================================================

    def _format(self, default: str) -> str:
        return self.fmt or default

    def _require_params(self, *families: ModelFamily) -> None:
        gate = validate_params(self.scenario.platform, *families)
        if not gate.is_valid:
            raise ScenarioError(gate.error_message)

    def _trials(self) -> int:
        if self.trials is not None:
            return self.trials
        request = self.scenario.simulation
        if request is not None and request.trials is not None:
            return request.trials
        return cfg.DEFAULT_TRIALS

    def _seed(self) -> int:
        if self.seed is not None:
            return self.seed
        request = self.scenario.simulation
        return request.seed if request is not None else cfg.DEFAULT_SEED

    def _pattern_optimum(self) -> PatternOptimum:
        request = self.scenario.require("pattern", "pattern")
        return optimize_pattern(request.mode, self.scenario.platform, request.k_max,
                                request.rollback, request.variant)

    def _build_result(self, success: bool, command: Command, exit_code: int, **kwargs) -> Dict[str, Any]:
        """Erstellt ein standardisiertes Ergebnis-Dictionary."""
        result = {"success": success, "command": command.value, "scenario": self.scenario.name,
                  "exit_code": exit_code}
        result.update(kwargs)
        return result

    # =========================================================================
    # OPTIMIZE
    # =========================================================================

    def _optimize(self) -> Dict[str, Any]:
        scenario = self.scenario
        params = scenario.platform
        degenerate = params.checkpoint_cost == 0.0
        document: Dict[str, Any] = {
            "scenario": scenario.name,
            "period_young": period_young(params),
            "period_daly": period_daly(params),
            "degenerate": degenerate,
        }
        if degenerate:
            logger.warning("C=0: Periode 0, kein sinnvolles Optimum (Degenerations-Flag gesetzt)")

        if params.detection_rate is not None:
            document["period_latency_naive"] = period_latency_naive(params)
            try:
                t_opt = period_firstorder(params)
            except ModelRegimeError as e:
                logger.warning(str(e))
                t_opt = None
                document["regime_note"] = str(e)
            document["period_firstorder"] = t_opt
            if t_opt is not None and t_opt > params.checkpoint_cost:
                report = waste_general(t_opt, params)
                document["firstorder"] = report
                if scenario.workload is not None:
                    document["expected_makespan_firstorder"] = makespan_from_waste(
                        scenario.workload.total_work, report.waste_total)
            if scenario.workload is not None:
                document["optimal_chunks"] = optimal_chunks(scenario.workload, params)
        else:
            document["period_firstorder"] = None

        if scenario.pattern is not None:
            self._require_params(ModelFamily.VERIFICATION)
            optimum = self._pattern_optimum()
            document["pattern"] = {
                "mode": optimum.mode,
                "k_opt": optimum.k_opt,
                "s_opt": optimum.s_opt,
                "waste": optimum.waste,
                "tmr_waste": cfg.TMR_WASTE,
            }
            if not scenario.pattern.is_search:
                document["pattern"]["requested"] = pattern_waste(scenario.pattern.to_spec(), params)

        write_json(self.sink, document)
        if self.report_path:
            write_report(self.report_path, "optimize_report.md.j2", {"doc": document, "scenario": scenario})
        return document

    # =========================================================================
    # RISK
    # =========================================================================

    @staticmethod
    def _row_kind(period: float, marks: Dict[str, Optional[float]]) -> str:
        """Marke der Zeile, z.B. "t_min+recommended"; sonst "sweep"."""
        labels = [name for name, t in marks.items() if t is not None and t == period]
        return "+".join(labels) or RISK_KIND_SWEEP

    def _risk_rows_exponential(self, periods: np.ndarray, k: int,
                               marks: Dict[str, Optional[float]]) -> List[Dict[str, Any]]:
        scenario = self.scenario
        curve = risk_curve(periods, k, scenario.workload, scenario.platform)
        waste = waste_curve(periods, scenario.platform)
        return [{"T": float(t), "p_fail": float(curve["p_fail"][i]), "p_lat": float(curve["p_lat"][i]),
                 "p_irrec": float(curve["p_irrec"][i]), "p_risk": float(curve["p_risk"][i]),
                 "waste_total": float(waste[i]), "kind": self._row_kind(float(t), marks)}
                for i, t in enumerate(periods)]

    def _risk_row(self, period: float, k: int, marks: Dict[str, Optional[float]]) -> Dict[str, Any]:
        scenario = self.scenario
        policy = scenario.policy.model_copy(update={"k": k})
        kind = self._row_kind(period, marks)
        if not period > scenario.platform.checkpoint_cost:
            return {"T": period, "p_fail": math.nan, "p_lat": math.nan, "p_irrec": math.nan,
                    "p_risk": math.nan, "waste_total": math.nan, "kind": kind}
        report: RiskReport = risk_report(period, policy, scenario.workload, scenario.platform,
                                         scenario.error_law(), scenario.detection_law())
        return {"T": period, "p_fail": report.p_fail, "p_lat": report.p_lat, "p_irrec": report.p_irrec,
                "p_risk": report.p_risk, "waste_total": waste_general(period, scenario.platform).waste_total,
                "kind": kind}

    def _default_periods(self, t_opt: float, t_min: Optional[float]) -> np.ndarray:
        c = self.scenario.platform.checkpoint_cost
        lo = max(c + 1.0, t_opt / 4.0)
        hi = max(4.0 * t_opt, 2.0 * (t_min or 0.0))
        return np.linspace(lo, hi, cfg.DEFAULT_SWEEP_POINTS)

    def _with_marks(self, periods: np.ndarray, marks: Dict[str, Optional[float]]) -> np.ndarray:
        # T_opt, T_min und die Empfehlung als eigene, markierte Zeilen
        c = self.scenario.platform.checkpoint_cost
        extra = [t for t in marks.values() if t is not None and t > c]
        return np.union1d(np.asarray(periods, dtype=float), extra)

    def _risk(self) -> Dict[str, Any]:
        scenario = self.scenario
        self._require_params(ModelFamily.LATENCY)
        policy = scenario.require("policy", "risk")
        workload = scenario.require("workload", "risk")
        params = scenario.platform
        laws = (scenario.error_law(), scenario.detection_law())
        exponential = all(law.family is LawFamily.EXPONENTIAL for law in laws)

        infeasible: Optional[InfeasibleRiskError] = None
        try:
            recommendation = recommend_period(policy, workload, params, *laws)
            t_opt, t_min = recommendation.t_opt, recommendation.t_min
        except InfeasibleRiskError as e:
            logger.error(str(e))
            infeasible = e
            recommendation = None
            t_opt, t_min = waste_optimal_period(params), None

        sweep = self.sweep
        if sweep is not None and sweep.variable not in ("T", "k"):
            raise ScenarioError(f"risk unterstützt nur Sweeps über T oder k, nicht {sweep.variable}")

        marks = {"t_opt": t_opt, "t_min": t_min,
                 "recommended": recommendation.recommended if recommendation else None}
        if sweep is not None and sweep.variable == "k":
            period = policy.period or (recommendation.recommended if recommendation else t_opt)
            columns = ["k"] + RISK_COLUMNS
            rows = [{"k": int(k), **self._risk_row(period, int(k), marks)} for k in sweep.values()]
        else:
            periods = sweep.values() if sweep is not None else self._default_periods(t_opt, t_min)
            periods = self._with_marks(periods, marks)
            columns = RISK_COLUMNS
            if exponential:
                rows = self._risk_rows_exponential(periods, policy.k, marks)
            else:
                rows = [self._risk_row(float(t), policy.k, marks) for t in periods]

        summary = {
            "t_opt": t_opt,
            "t_min": t_min,
            "recommended": recommendation.recommended if recommendation else None,
            "p_risk_at_recommended": recommendation.p_risk_at_recommended if recommendation else None,
            "epsilon": policy.epsilon,
            "k": policy.k,
        }
        if self._format("csv") == "json":
            write_json(self.sink, {"scenario": scenario.name, **summary, "rows": rows})
        else:
            write_csv(self.sink, columns, rows)
        logger.info(f"Risiko: T_opt={t_opt!r}s, T_min={t_min!r}s, empfohlen={summary['recommended']!r}s")
        if infeasible is not None:
            raise infeasible
        return summary

    # =========================================================================
    # PATTERN
    # =========================================================================

    def _pattern(self) -> Dict[str, Any]:
        scenario = self.scenario
        self._require_params(ModelFamily.VERIFICATION)
        request = scenario.require("pattern", "pattern")
        params = scenario.platform
        sweep = self.sweep

        if sweep is not None and sweep.variable == "V":
            rows = [{"V": v, "k": row.k, "s_opt": row.s_opt, "waste": row.waste}
                    for v, row in pattern_grid(request.mode, params, sweep.values(), request.k_max,
                                               request.rollback, request.variant)]
            columns = PATTERN_GRID_COLUMNS
            summary: Dict[str, Any] = {"mode": request.mode}
        elif sweep is not None and sweep.variable == "S":
            k = request.k or self._pattern_optimum().k_opt
            rows = []
            for s in sweep.values():
                try:
                    breakdown = pattern_waste(request.to_spec(k=k, period=float(s)), params)
                    rows.append({"S": float(s), "waste_ff": breakdown.waste_ff,
                                 "waste_fail": breakdown.waste_fail, "waste": breakdown.waste_total})
                except (ValueError, ResilienceError, ValidationError):
                    # S deckt die festen Kosten nicht
                    rows.append({"S": float(s), "waste_ff": math.nan, "waste_fail": math.nan,
                                 "waste": math.nan})
            columns = PATTERN_PERIOD_COLUMNS
            summary = {"mode": request.mode, "k": k}
        else:
            optimum = self._pattern_optimum()
            table = optimum.table
            if sweep is not None and sweep.variable == "k":
                wanted = {int(k) for k in sweep.values()}
                table = [row for row in table if row.k in wanted]
            elif sweep is not None:
                raise ScenarioError(f"pattern unterstützt keinen Sweep über {sweep.variable}")
            rows = [{"k": row.k, "s_opt": row.s_opt, "waste": row.waste} for row in table]
            columns = PATTERN_COLUMNS
            summary = {"mode": optimum.mode, "k_opt": optimum.k_opt, "s_opt": optimum.s_opt,
                       "waste": optimum.waste, "below_tmr": optimum.waste < cfg.TMR_WASTE}
            logger.info(f"Muster: waste={optimum.waste!r} gegenüber dreifacher Redundanz {cfg.TMR_WASTE!r}")

        summary["tmr_waste"] = cfg.TMR_WASTE
        if self._format("csv") == "json":
            write_json(self.sink, {"scenario": scenario.name, **summary, "rows": rows})
        else:
            write_csv(self.sink, columns, rows)
        return summary

    # =========================================================================
    # SIMULATE
    # =========================================================================

    def _sim_config(self) -> SimConfig:
        scenario = self.scenario
        request = scenario.simulation
        workload = scenario.require("workload", "simulate")
        kind = request.model if request is not None and request.model else None
        if kind is None:
            kind = "pattern" if scenario.pattern is not None and scenario.policy is None else "bounded_storage"

        if kind == "pattern":
            self._require_params(ModelFamily.VERIFICATION)
            pattern = scenario.require("pattern", "simulate")
            if pattern.is_search:
                optimum = self._pattern_optimum()
                spec = pattern.to_spec(k=optimum.k_opt, period=optimum.s_opt)
            else:
                spec = pattern.to_spec()
            model = PatternModel(pattern=spec)
        else:
            self._require_params(ModelFamily.LATENCY)
            policy = scenario.policy
            period = request.period if request is not None else None
            if period is None and policy is not None:
                period = policy.period or recommend_period(policy, workload, scenario.platform).recommended
            if period is None:
                period = waste_optimal_period(scenario.platform)
            k = request.k if request is not None and request.k is not None else (policy.k if policy else None)
            model = BoundedStorageModel(period=period, k=k)

        return SimConfig(
            model=model,
            workload=workload,
            params=scenario.platform,
            error_law=scenario.error_law(),
            detection_law=scenario.detection_law(),
            trials=self._trials(),
            seed=self._seed(),
            max_sim_time=request.max_sim_time if request is not None else None,
        )

    def _simulate(self) -> Dict[str, Any]:
        config = self._sim_config()
        as_csv = self._format("json") == "csv"
        result = simulate(config, workers=self.workers, keep_trials=as_csv)
        if as_csv:
            write_frame(self.sink, result.per_trial)
        else:
            write_json(self.sink, {"scenario": self.scenario.name, "model": config.model, "result": result})
        return {"waste_mean": result.waste_mean, "irrecoverable_count": result.irrecoverable_count}

    # =========================================================================
    # VALIDATE
    # =========================================================================

    def _validate(self) -> Dict[str, Any]:
        trials, seed = self._trials(), self._seed()
        checks = run_oracle_checks(self.scenario, trials, seed, self.workers)
        passed = all(check.passed for check in checks)
        if self._format("json") == "csv":
            write_csv(self.sink, VALIDATE_COLUMNS,
                      [{"check": c.name, "analytic": c.analytic, "simulated": c.simulated, "delta": c.delta,
                        "stderr": c.stderr, "tolerance": c.tolerance, "passed": c.passed} for c in checks])
        else:
            write_json(self.sink, {"scenario": self.scenario.name, "trials": trials, "seed": seed,
                                   "passed": passed, "checks": checks})
        if self.report_path:
            write_report(self.report_path, "validation_report.md.j2",
                         {"scenario": self.scenario, "checks": checks, "passed": passed,
                          "trials": trials, "seed": seed})
        return {"passed": passed, "failed": [c.name for c in checks if not c.passed]}

    # =========================================================================
    # MAIN METHOD
    # =========================================================================

    def run(self, command: Command) -> Dict[str, Any]:
        """Führt einen Befehl aus und übersetzt Fehler in Exit-Codes."""
        command = Command(command)
        handlers = {
            Command.OPTIMIZE: self._optimize,
            Command.RISK: self._risk,
            Command.PATTERN: self._pattern,
            Command.SIMULATE: self._simulate,
            Command.VALIDATE: self._validate,
        }
        logger.info(f"Starte '{command.value}' für Szenario '{self.scenario.name}'")
        try:
            details = handlers[command]()
        except ResilienceError as e:
            logger.error(f"'{command.value}' abgebrochen: {e}")
            return self._build_result(False, command, e.exit_code, error=str(e))
        except ValidationError as ve:
            message = " | ".join(format_validation_errors(ve))
            logger.error(f"'{command.value}': ungültige Eingabe: {message}")
            return self._build_result(False, command, EXIT_INVALID, error=message)
        except Exception as e:
            logger.exception(f"Unerwarteter Fehler in '{command.value}'")
            return self._build_result(False, command, EXIT_UNEXPECTED, error=str(e))

        if command is Command.VALIDATE and not details["passed"]:
            logger.warning(f"Validierung fehlgeschlagen: {details['failed']}")
            return self._build_result(False, command, EXIT_VALIDATION, **details)
        logger.info(f"'{command.value}' erfolgreich beendet")
        return self._build_result(True, command, EXIT_OK, **details)


def run_command(command: Command, scenario: Scenario, sink: TextIO, **options) -> int:
    """Führt `command` aus und gibt den Exit-Code zurück."""
    return CommandController(scenario, sink, **options).run(command)["exit_code"]
