"""
Fehlerhierarchie. Jeder Fehler kennt den Exit-Code, den die CLI dafür meldet.
"""

from typing import Optional


class ResilienceError(Exception):
    """Basisklasse aller fachlichen Fehler."""
    exit_code = 1


class ParameterDomainError(ResilienceError, ValueError):
    """Parameter ausserhalb des erlaubten Wertebereichs."""
    exit_code = 2


class MissingParameterError(ResilienceError):
    """Ein optionaler Parameter (V oder lambda_d) fehlt für das angeforderte Modell."""
    exit_code = 2

    def __init__(self, field_name: str, model: str):
        super().__init__(field_name, model)
        self.field_name = field_name
        self.model = model

    def __str__(self) -> str:
        return f"{self.field_name} fehlt (benötigt für {self.model})"


class LambertDomainError(ParameterDomainError):
    """Argument liegt links vom Verzweigungspunkt -1/e."""


class ScenarioError(ResilienceError):
    """Szenario-Dokument nicht lesbar oder ungültig."""
    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(message, line, column)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is not None:
            return f"Zeile {self.line}, Spalte {self.column}: {self.message}"
        return self.message


class ModelRegimeError(ResilienceError):
    """Parameter verlassen den Gültigkeitsbereich des Modells erster Ordnung."""
    exit_code = 3


class LambertConvergenceError(ModelRegimeError):
    pass


class InfeasibleRiskError(ModelRegimeError):
    """Risikoschwelle epsilon im Suchbereich nicht erreichbar."""

    def __init__(self, epsilon: float, achieved_risk: float, ceiling: float):
        super().__init__(epsilon, achieved_risk, ceiling)
        self.epsilon = epsilon
        self.achieved_risk = achieved_risk
        self.ceiling = ceiling

    def __str__(self) -> str:
        return (f"Risikoschwelle {self.epsilon!r} bis T={self.ceiling!r}s nicht erreichbar, "
                f"minimales Risiko {self.achieved_risk!r}")


class SimulationRunawayError(ResilienceError):
    """Ein Lauf überschreitet max_sim_time."""
    exit_code = 4

    def __init__(self, trial_index: int, seed: int, max_sim_time: float):
        super().__init__(trial_index, seed, max_sim_time)
        self.trial_index = trial_index
        self.seed = seed
        self.max_sim_time = max_sim_time

    def __str__(self) -> str:
        return (f"Simulation abgebrochen: Lauf {self.trial_index} (Seed {self.seed}) "
                f"überschreitet max_sim_time={self.max_sim_time!r}s")


class SimulationInvariantError(ResilienceError):
    """Interne Invariante der Simulation verletzt."""
