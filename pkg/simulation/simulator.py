"""
Monte-Carlo-Simulator: führt unabhängige Läufe aus und aggregiert Laufzeit,
Verschwendung und nicht behebbare Fehler.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator
from tqdm import tqdm
from typing_extensions import Annotated

import config.config as cfg
from analytics.patterns import PatternSpec
from schema.models import DistributionSpec, LawRole, PlatformParams, PositiveDurationType, WorkloadSpec
from simulation.base_trial import BaseTrialModel, TrialOutcome
from simulation.bounded_storage import BoundedStorageTrial
from simulation.pattern_trial import PatternTrial
from simulation.rng import rng_stream

logger = logging.getLogger(__name__)


# =============================================================================
# KONFIGURATION
# =============================================================================
class BoundedStorageModel(BaseModel):
    """Periodische Checkpoints, passive Erkennung, k gespeicherte Checkpoints (None = unbegrenzt)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["bounded_storage"] = "bounded_storage"
    period: PositiveDurationType
    k: Optional[PositiveInt] = None


class PatternModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["pattern"] = "pattern"
    pattern: PatternSpec


SimModel = Annotated[Union[BoundedStorageModel, PatternModel], Field(discriminator="kind")]


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: SimModel
    workload: WorkloadSpec
    params: PlatformParams
    error_law: Optional[DistributionSpec] = None
    detection_law: Optional[DistributionSpec] = None
    trials: PositiveInt = cfg.DEFAULT_TRIALS
    seed: int = Field(default=cfg.DEFAULT_SEED, ge=0, lt=2 ** 64)
    max_sim_time: Optional[float] = None

    @model_validator(mode="after")
    def check_runaway_guard(self) -> "SimConfig":
        if self.max_sim_time is not None:
            minimum = cfg.RUNAWAY_MIN_FACTOR * self.build_trial_model().failure_free_makespan
            if self.max_sim_time < minimum:
                raise ValueError(f"max_sim_time muss >= {minimum!r}s sein (10 x fehlerfreie Laufzeit)")
        return self

    def resolved_error_law(self) -> DistributionSpec:
        if self.error_law is not None:
            return self.error_law
        return DistributionSpec.exponential(self.params.error_rate, LawRole.ERROR_ARRIVAL)

    def resolved_detection_law(self) -> DistributionSpec:
        if self.detection_law is not None:
            return self.detection_law
        rate = 1.0 / self.params.require_detection("Simulation mit Erkennungslatenz")
        return DistributionSpec.exponential(rate, LawRole.DETECTION_LATENCY)

    def build_trial_model(self) -> BaseTrialModel:
        """Erzeugt das Laufmodell; max_sim_time Standard: RUNAWAY_FACTOR x fehlerfreie Laufzeit."""
        limit = math.inf
        if isinstance(self.model, BoundedStorageModel):
            trial = BoundedStorageTrial(self.model.period, self.model.k, self.workload.total_work, self.params,
                                        self.resolved_error_law(), self.resolved_detection_law(), limit, self.seed)
        else:
            trial = PatternTrial(self.model.pattern, self.workload.total_work, self.params,
                                 self.resolved_error_law(), limit, self.seed)
        trial.max_sim_time = (self.max_sim_time if self.max_sim_time is not None
                              else cfg.RUNAWAY_FACTOR * trial.failure_free_makespan)
        return trial


# =============================================================================
# ERGEBNIS
# =============================================================================
@dataclass
class SimResult:
    trials: int
    seed: int
    base_time: float
    failure_free_makespan: float
    mean_makespan: float
    makespan_stderr: float
    waste_mean: float
    waste_stderr: float
    irrecoverable_count: int
    attempts_total: int
    errors_total: int
    detections_total: int
    post_verification_errors: int
    per_trial: Optional[pd.DataFrame] = field(default=None, repr=False, compare=False)

    @property
    def irrecoverable_frequency(self) -> float:
        """Nicht behebbare Fehler pro Ausführungsversuch."""
        return self.irrecoverable_count / self.attempts_total

    @property
    def irrecoverable_stderr(self) -> float:
        p = self.irrecoverable_frequency
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.attempts_total)

    @property
    def mean_attempts(self) -> float:
        return self.attempts_total / self.trials


_COLUMNS = ("makespan", "attempts", "irrecoverable", "errors", "detections", "post_verification_errors")


def _run_block(config: SimConfig, start: int, stop: int) -> np.ndarray:
    """Läufe [start, stop) in Lauf-Reihenfolge; eine Zeile pro Lauf."""
    model = config.build_trial_model()
    block = np.empty((stop - start, len(_COLUMNS)), dtype=float)
    for row, trial_index in enumerate(range(start, stop)):
        outcome: TrialOutcome = model.run_trial(rng_stream(config.seed, trial_index), trial_index)
        block[row] = (outcome.makespan, outcome.attempts, outcome.irrecoverable, outcome.errors,
                      outcome.detections, outcome.post_verification_errors)
    return block


def _blocks(trials: int, workers: int) -> List[Tuple[int, int]]:
    size = max(1, math.ceil(trials / (workers * 8)))
    return [(start, min(start + size, trials)) for start in range(0, trials, size)]


def simulate(config: SimConfig, workers: int = cfg.DEFAULT_WORKERS, progress: Optional[bool] = None,
             keep_trials: bool = False) -> SimResult:
    """
    Führt config.trials unabhängige Läufe aus.

    Ergebnisse werden in Lauf-Reihenfolge zusammengeführt und sind für festen
    (seed, trials) bitgleich, unabhängig von `workers`.
    """
    show = cfg.SHOW_PROGRESS if progress is None else progress
    trial_model = config.build_trial_model()
    base_time = trial_model.total_work
    blocks = _blocks(config.trials, max(1, workers))
    logger.info(f"Starte Simulation: {config.trials} Läufe, Seed {config.seed}, {workers} Worker")

    results: List[np.ndarray] = []
    with tqdm(total=config.trials, disable=not show, desc="Simulation", unit="Lauf") as bar:
        if workers <= 1:
            for start, stop in blocks:
                results.append(_run_block(config, start, stop))
                bar.update(stop - start)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_block, config, start, stop) for start, stop in blocks]
                for (start, stop), future in zip(blocks, futures):
                    results.append(future.result())
                    bar.update(stop - start)

    table = np.concatenate(results, axis=0)
    makespans = table[:, 0]
    mean = float(np.mean(makespans))
    stderr = float(np.std(makespans, ddof=1) / math.sqrt(len(makespans))) if len(makespans) > 1 else 0.0

    result = SimResult(
        trials=config.trials,
        seed=config.seed,
        base_time=base_time,
        failure_free_makespan=trial_model.failure_free_makespan,
        mean_makespan=mean,
        makespan_stderr=stderr,
        waste_mean=1.0 - base_time / mean,
        # Delta-Methode: d(1 - W/m) = W/m^2 dm
        waste_stderr=base_time * stderr / (mean * mean),
        irrecoverable_count=int(table[:, 2].sum()),
        attempts_total=int(table[:, 1].sum()),
        errors_total=int(table[:, 3].sum()),
        detections_total=int(table[:, 4].sum()),
        post_verification_errors=int(table[:, 5].sum()),
    )
    if keep_trials:
        result.per_trial = pd.DataFrame({
            "trial": np.arange(config.trials),
            "makespan": makespans,
            "attempts": table[:, 1].astype(int),
            "irrecoverable_flag": (table[:, 2] > 0).astype(int),
        })
    logger.info(f"Simulation beendet: waste={result.waste_mean!r} +- {result.waste_stderr!r}, "
                f"nicht behebbar={result.irrecoverable_count}")
    return result
