from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np

from schema.models import DistributionSpec
from utils.errors import SimulationRunawayError


@dataclass
class TrialOutcome:
    """Ergebnis eines einzelnen Laufs."""
    makespan: float
    attempts: int = 1
    irrecoverable: int = 0
    errors: int = 0
    detections: int = 0
    post_verification_errors: int = 0
    committed_work: float = 0.0


class ErrorClock:
    """
    Erneuerungsprozess der Fehlerankünfte auf der exponierten Zeitachse.

    `next` ist der Zeitpunkt des nächsten Fehlers. Während der Downtime D
    wird die Uhr angehalten (`pause`).
    """
    __slots__ = ("_draw", "next")

    def __init__(self, draw: Callable[[], float], start: float = 0.0):
        self._draw = draw
        self.next = start + draw()

    def advance(self) -> float:
        """Gibt den aktuellen Fehlerzeitpunkt zurück und zieht den nächsten."""
        current = self.next
        self.next = current + self._draw()
        return current

    def pause(self, duration: float) -> None:
        self.next += duration

    def skip_past(self, t: float) -> int:
        """Verwirft Fehler bis einschliesslich t (zurückgerollter oder untätiger Bereich)."""
        skipped = 0
        while self.next <= t:
            self.advance()
            skipped += 1
        return skipped


class BaseTrialModel(ABC):
    """
    Abstrakte Basisklasse für Simulationsmodelle.
    Ein Modell simuliert genau einen Lauf mit dem übergebenen Zufallsstrom.
    """

    def __init__(self, error_law: DistributionSpec, max_sim_time: float, seed: int):
        self.error_law = error_law
        self.max_sim_time = max_sim_time
        self.seed = seed

    @property
    @abstractmethod
    def failure_free_makespan(self) -> float:
        """Laufzeit ohne Fehler: Arbeit plus alle Checkpoints und Verifikationen."""

    @property
    @abstractmethod
    def total_work(self) -> float:
        """W, die Basis der Verschwendung."""

    @abstractmethod
    def run_trial(self, rng: np.random.Generator, trial_index: int) -> TrialOutcome:
        """Simuliert einen Lauf bis die gesamte Arbeit W committet ist."""

    def _check_runaway(self, t: float, trial_index: int) -> None:
        if t > self.max_sim_time:
            raise SimulationRunawayError(trial_index, self.seed, self.max_sim_time)

    @staticmethod
    def split_work(total_work: float, work_per_unit: float) -> list:
        """Teilt W in gleich grosse Stücke; das letzte Stück nimmt den Rest."""
        count = max(1, int(np.ceil(total_work / work_per_unit - 1e-9)))
        pieces = [work_per_unit] * (count - 1)
        pieces.append(total_work - work_per_unit * (count - 1))
        return pieces
