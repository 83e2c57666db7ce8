"""
Simulation periodischer Muster; Fehler werden nur durch Verifikationen erkannt.

Ein Checkpoint gilt als sauber, wenn der Zustand bei Ende des Schreibens
fehlerfrei ist. Ein Fehler während des Checkpoints direkt nach einer
erfolgreichen Verifikation wird als Korruption in das nächste Muster
mitgenommen und dort gezählt.
"""

import logging
import math
from typing import Callable, List

import numpy as np

from analytics.patterns import PatternMode, PatternSpec, RollbackStrategy
from schema.models import DistributionSpec, PlatformParams
from simulation.base_trial import BaseTrialModel, ErrorClock, TrialOutcome
from utils.errors import SimulationInvariantError

logger = logging.getLogger(__name__)


class _Execution:
    """Zeit, Fehleruhr und Korruptionszustand eines Laufs."""
    __slots__ = ("t", "clock", "corrupt", "outcome", "check_runaway")

    def __init__(self, clock: ErrorClock, outcome: TrialOutcome, check_runaway: Callable[[float], None]):
        self.t = 0.0
        self.clock = clock
        self.corrupt = False
        self.outcome = outcome
        self.check_runaway = check_runaway

    def expose(self, duration: float) -> None:
        """Aktivität der Dauer `duration`; jeder Fehler darin korrumpiert den Zustand."""
        end = self.t + duration
        clock = self.clock
        while clock.next < end:
            clock.advance()
            self.outcome.errors += 1
            self.corrupt = True
        self.t = end
        self.check_runaway(end)

    def downtime(self, duration: float) -> None:
        self.clock.pause(duration)
        self.t += duration

    def load(self, recovery: float) -> None:
        """Lädt einen Checkpoint; danach ist der Zustand der des Checkpoints."""
        self.corrupt = False
        self.expose(recovery)


class PatternTrial(BaseTrialModel):

    def __init__(self, spec: PatternSpec, total_work: float, params: PlatformParams,
                 error_law: DistributionSpec, max_sim_time: float, seed: int):
        super().__init__(error_law, max_sim_time, seed)
        self.spec = spec
        self.params = params
        self._total_work = total_work
        self.verification = params.require_verification("Mustersimulation")
        segment = spec.segment_work(params)
        # Arbeit pro Muster = k Segmente
        self.pattern_work = self.split_work(total_work, segment * spec.k)

    @property
    def total_work(self) -> float:
        return self._total_work

    @property
    def failure_free_makespan(self) -> float:
        return self._total_work + len(self.pattern_work) * self.spec.fixed_cost(self.params)

    def run_trial(self, rng: np.random.Generator, trial_index: int) -> TrialOutcome:
        outcome = TrialOutcome(makespan=0.0)
        execution = _Execution(ErrorClock(self.error_law.sampler(rng)), outcome,
                               lambda t: self._check_runaway(t, trial_index))
        k = self.spec.k
        committed = 0.0
        for work in self.pattern_work:
            segment = work / k
            if self.spec.mode is PatternMode.CHECKPOINT_HEAVY:
                self._run_checkpoint_heavy(execution, segment)
            else:
                self._run_verification_heavy(execution, segment)
            committed += work

        if outcome.irrecoverable != 0 or not math.isclose(committed, self._total_work, rel_tol=1e-9):
            raise SimulationInvariantError(f"Musterlauf inkonsistent: committed={committed!r}")
        outcome.committed_work = self._total_work
        outcome.makespan = execution.t
        return outcome

    # =========================================================================
    # k Checkpoints, 1 Verifikation
    # =========================================================================
    def _run_checkpoint_heavy(self, ex: _Execution, segment: float) -> None:
        k = self.spec.k
        c = self.params.checkpoint_cost
        v = self.verification
        # clean[j]: Checkpoint C_j dieses Musters ist fehlerfrei; C_0 ist verifiziert
        clean: List[bool] = [True] + [False] * k
        index = 1
        while index <= k:
            ex.expose(segment)
            if index < k:
                ex.expose(c)
                clean[index] = not ex.corrupt
                index += 1
                continue
            ex.expose(v)
            if not ex.corrupt:
                ex.expose(c)
                if ex.corrupt:
                    ex.outcome.post_verification_errors += 1
                index += 1
                continue
            ex.outcome.detections += 1
            ex.downtime(self.params.downtime)
            if self.spec.rollback is RollbackStrategy.BINARY_SEARCH:
                restored = self._bisect_rollback(ex, clean)
            else:
                restored = self._linear_rollback(ex, clean)
            for j in range(restored + 1, k):
                clean[j] = False
            index = restored + 1

    def _linear_rollback(self, ex: _Execution, clean: List[bool]) -> int:
        """Lädt C_{k-1}, C_{k-2}, ... und verifiziert, bis einer korrekt ist. C_0 ohne Verifikation."""
        r = self.params.recovery_cost
        v = self.verification
        j = self.spec.k - 1
        while True:
            ex.load(r)
            if j == 0:
                return 0
            stored_bad = not clean[j]
            ex.expose(v)
            if stored_bad or ex.corrupt:
                j -= 1
                continue
            return j

    def _bisect_rollback(self, ex: _Execution, clean: List[bool]) -> int:
        """Binäre Suche nach dem jüngsten korrekten Checkpoint; jede Probe kostet R + V."""
        r = self.params.recovery_cost
        v = self.verification
        low, high = 0, self.spec.k - 1
        loaded = None
        while low < high:
            middle = (low + high + 1) // 2
            ex.load(r)
            ex.expose(v)
            loaded = middle
            if clean[middle] and not ex.corrupt:
                low = middle
            else:
                high = middle - 1
        if loaded != low:
            ex.load(r)
        return low

    # =========================================================================
    # k Verifikationen, 1 Checkpoint
    # =========================================================================
    def _run_verification_heavy(self, ex: _Execution, segment: float) -> None:
        k = self.spec.k
        c = self.params.checkpoint_cost
        v = self.verification
        index = 1
        while index <= k:
            ex.expose(segment)
            ex.expose(v)
            if ex.corrupt:
                ex.outcome.detections += 1
                ex.downtime(self.params.downtime)
                ex.load(self.params.recovery_cost)
                index = 1
                continue
            if index == k:
                ex.expose(c)
                if ex.corrupt:
                    ex.outcome.post_verification_errors += 1
            index += 1
