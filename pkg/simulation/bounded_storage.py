"""
Simulation mit passiver Fehlererkennung (Latenz) und begrenztem Checkpoint-Speicher.

Jede Periode besteht aus Arbeit T - C und einem Checkpoint C. Ein Fehler wird
nach seiner Latenz erkannt; zurückgerollt wird auf den jüngsten gespeicherten
Checkpoint, der vor dem frühesten unerkannten Fehler fertig wurde. Liegt dieser
nicht mehr im Ringpuffer der Tiefe k, beginnt die Arbeit von vorn.
"""

import logging
import math
from collections import deque
from typing import Optional

import numpy as np

from schema.models import DistributionSpec, PlatformParams
from simulation.base_trial import BaseTrialModel, ErrorClock, TrialOutcome
from utils.errors import ParameterDomainError, SimulationInvariantError

logger = logging.getLogger(__name__)

_WORK = 0
_RECOVER = 1
_DONE = 2


class BoundedStorageTrial(BaseTrialModel):

    def __init__(self, period: float, k: Optional[int], total_work: float, params: PlatformParams,
                 error_law: DistributionSpec, detection_law: DistributionSpec,
                 max_sim_time: float, seed: int):
        super().__init__(error_law, max_sim_time, seed)
        c = params.checkpoint_cost
        if not period > c:
            raise ParameterDomainError(f"Periode {period!r}s muss grösser als checkpoint_cost {c!r}s sein")
        if k is not None and k < 1:
            raise ParameterDomainError(f"k muss >= 1 sein, erhalten {k!r}")
        self.period = period
        self.k = k
        self.params = params
        self.detection_law = detection_law
        self._total_work = total_work
        # Chunk = Arbeit + abschliessender Checkpoint
        self.chunks = [w + c for w in self.split_work(total_work, period - c)]

    @property
    def total_work(self) -> float:
        return self._total_work

    @property
    def failure_free_makespan(self) -> float:
        return math.fsum(self.chunks)

    def run_trial(self, rng: np.random.Generator, trial_index: int) -> TrialOutcome:
        clock = ErrorClock(self.error_law.sampler(rng))
        latency = self.detection_law.sampler(rng)
        downtime = self.params.downtime
        recovery = self.params.recovery_cost
        chunks = self.chunks
        n_chunks = len(chunks)

        outcome = TrialOutcome(makespan=0.0)
        t = 0.0
        # (Fertigstellungszeit, Fortschritt) der gespeicherten Checkpoints
        ring = deque([(0.0, 0)], maxlen=self.k)
        progress = 0
        phase = _WORK
        remaining = chunks[0]
        earliest_error = math.inf
        detection = math.inf

        while True:
            self._check_runaway(t, trial_index)

            if phase == _DONE:
                if earliest_error == math.inf:
                    break
                # Arbeit fertig, aber ein Fehler ist noch unerkannt: warten
                t = detection
            else:
                end = t + remaining
                while clock.next < min(end, detection):
                    error_time = clock.advance()
                    outcome.errors += 1
                    if error_time < earliest_error:
                        earliest_error = error_time
                    detection = min(detection, error_time + latency())
                if detection >= end:
                    t = end
                    if phase == _RECOVER:
                        phase = _WORK
                    else:
                        progress += 1
                        ring.append((t, progress))
                        phase = _DONE if progress == n_chunks else _WORK
                    if phase == _WORK:
                        remaining = chunks[progress]
                    continue
                t = detection

            # Erkennung zum Zeitpunkt t
            outcome.detections += 1
            target = None
            while ring:
                if ring[-1][0] < earliest_error:
                    target = ring[-1]
                    break
                ring.pop()
            failed_at = earliest_error
            clock.skip_past(t)
            clock.pause(downtime)
            t += downtime
            earliest_error = math.inf
            detection = math.inf

            if target is None:
                # Gültiger Checkpoint bereits verdrängt: Neustart von vorn
                outcome.irrecoverable += 1
                outcome.attempts += 1
                ring = deque([(t, 0)], maxlen=self.k)
                progress = 0
                phase = _WORK
                remaining = chunks[0]
                continue

            if target[0] >= failed_at:
                raise SimulationInvariantError("wiederhergestellter Checkpoint liegt nicht vor dem Fehler")
            progress = target[1]
            if recovery > 0.0:
                phase = _RECOVER
                remaining = recovery
            else:
                phase = _WORK
                remaining = chunks[progress]

        committed = math.fsum(chunks[:progress]) - self.params.checkpoint_cost * progress
        if progress != n_chunks or not math.isclose(committed, self._total_work, rel_tol=1e-9):
            raise SimulationInvariantError(f"Arbeit nicht vollständig committet: {committed!r}")
        outcome.committed_work = self._total_work
        outcome.makespan = t
        return outcome
