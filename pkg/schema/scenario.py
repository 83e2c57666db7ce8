"""
Szenario-Dokumente (YAML) mit expliziten Einheiten auf allen Dauern.
"""

import logging
import os
from typing import Any, Literal, Optional

import numpy as np
import yaml
from pydantic import (BaseModel, ConfigDict, Field, PositiveInt, ValidationError,
                      field_serializer, model_validator)

import config.config as cfg
from analytics.bounded_risk import BoundedStoragePolicy
from analytics.patterns import PatternMode, PatternSpec, RollbackStrategy, WasteVariant
from schema.models import (DistributionSpec, LawFamily, LawRole, PlatformParams,
                           PositiveDurationType, WorkloadSpec)
from schema.units import format_duration, parse_duration
from utils.errors import ScenarioError
from validation.param_gate import format_validation_errors, validate_params

logger = logging.getLogger(__name__)


class PatternRequest(BaseModel):
    """Festes Muster (k und period gesetzt) oder Suche über k = 1..k_max."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: PatternMode
    k: Optional[PositiveInt] = None
    period: Optional[PositiveDurationType] = None
    k_max: PositiveInt = cfg.DEFAULT_K_MAX
    rollback: RollbackStrategy = RollbackStrategy.LINEAR
    variant: WasteVariant = WasteVariant.PUBLISHED

    @model_validator(mode="after")
    def check_fixed_pattern(self) -> "PatternRequest":
        if (self.k is None) != (self.period is None):
            raise ValueError("k und period nur gemeinsam angeben")
        return self

    @property
    def is_search(self) -> bool:
        return self.k is None

    def to_spec(self, k: Optional[int] = None, period: Optional[float] = None) -> PatternSpec:
        return PatternSpec(mode=self.mode, k=k or self.k, period=period or self.period,
                           rollback=self.rollback, variant=self.variant)


class LawRequest(BaseModel):
    """Verteilungsgesetz im Szenario; der Mittelwert kommt aus den Plattformraten."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: LawFamily = LawFamily.EXPONENTIAL
    shape: Optional[float] = None

    @model_validator(mode="after")
    def check_shape(self) -> "LawRequest":
        if self.family is LawFamily.WEIBULL and (self.shape is None or not self.shape > 0):
            raise ValueError("Weibull braucht shape > 0")
        if self.family is LawFamily.EXPONENTIAL and self.shape is not None:
            raise ValueError("shape nur für Weibull")
        return self

    def build(self, mean: float, role: LawRole) -> DistributionSpec:
        if self.family is LawFamily.EXPONENTIAL:
            return DistributionSpec.exponential(1.0 / mean, role)
        return DistributionSpec.weibull_with_mean(self.shape, mean, role)


class Distributions(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    error_law: LawRequest = LawRequest()
    detection_law: LawRequest = LawRequest()


class SweepSpec(BaseModel):
    """Achse eines Sweeps: variable in {T, k, V, S}, Bereich [lo, hi], Punkte oder Schrittweite."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    variable: Literal["T", "k", "V", "S"]
    lo: float
    hi: float
    points: Optional[PositiveInt] = None
    step: Optional[float] = None
    scale: Literal["linear", "log"] = "linear"

    @model_validator(mode="before")
    @classmethod
    def parse_bounds(cls, data: Any) -> Any:
        """k-Grenzen sind Zahlen, alle anderen Grenzen Dauern mit Einheit."""
        if not isinstance(data, dict):
            return data
        parse = float if data.get("variable") == "k" else parse_duration
        return {key: parse(value) if key in ("lo", "hi", "step") and value is not None else value
                for key, value in data.items()}

    @model_validator(mode="after")
    def check_range(self) -> "SweepSpec":
        if not self.lo < self.hi:
            raise ValueError(f"Sweep-Bereich leer oder ungeordnet: lo={self.lo!r}, hi={self.hi!r}")
        if self.points is not None and self.step is not None:
            raise ValueError("entweder points oder step angeben")
        if self.step is not None and not self.step > 0:
            raise ValueError("step muss positiv sein")
        if self.points is not None and self.points < 2:
            raise ValueError("points muss >= 2 sein")
        if self.scale == "log" and not self.lo > 0:
            raise ValueError("logarithmischer Sweep braucht lo > 0")
        if self.variable == "k" and self.lo < 1:
            raise ValueError("k-Sweep beginnt bei 1")
        return self

    @field_serializer("lo", "hi", "step")
    def serialize_bound(self, value: Optional[float]) -> Any:
        if value is None or self.variable == "k":
            return value
        return format_duration(value)

    def values(self) -> np.ndarray:
        if self.variable == "k":
            return np.arange(int(np.ceil(self.lo)), int(np.floor(self.hi)) + 1,
                             int(self.step) if self.step else 1, dtype=float)
        if self.step is not None:
            return np.arange(self.lo, self.hi + 0.5 * self.step, self.step)
        points = self.points or cfg.DEFAULT_SWEEP_POINTS
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, points)
        return np.linspace(self.lo, self.hi, points)

    @classmethod
    def parse_cli(cls, text: str) -> "SweepSpec":
        """'T=2000s:20000s:100' oder 'k=1:20' oder 'T=100s:1d:50:log'."""
        try:
            variable, rest = text.split("=", 1)
            parts = rest.split(":")
            data = {"variable": variable.strip(), "lo": parts[0], "hi": parts[1]}
            if len(parts) > 2 and parts[2]:
                data["points"] = int(parts[2])
            if len(parts) > 3:
                data["scale"] = parts[3]
        except (ValueError, IndexError):
            raise ScenarioError(f"Sweep '{text}' nicht lesbar (erwartet var=lo:hi[:n[:log]])")
        try:
            return cls.model_validate(data)
        except ValidationError as ve:
            raise ScenarioError(f"Sweep '{text}': " + " | ".join(format_validation_errors(ve)))


class SimulationRequest(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: Optional[Literal["bounded_storage", "pattern"]] = None
    trials: Optional[PositiveInt] = None
    seed: int = Field(default=cfg.DEFAULT_SEED, ge=0, lt=2 ** 64)
    period: Optional[PositiveDurationType] = None
    k: Optional[PositiveInt] = None
    max_sim_time: Optional[PositiveDurationType] = None


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    notes: Optional[str] = None
    platform: PlatformParams
    workload: Optional[WorkloadSpec] = None
    policy: Optional[BoundedStoragePolicy] = None
    pattern: Optional[PatternRequest] = None
    distributions: Distributions = Distributions()
    sweep: Optional[SweepSpec] = None
    simulation: Optional[SimulationRequest] = None

    def error_law(self) -> DistributionSpec:
        return self.distributions.error_law.build(self.platform.mu_e, LawRole.ERROR_ARRIVAL)

    def detection_law(self) -> Optional[DistributionSpec]:
        if self.platform.mu_d is None:
            return None
        return self.distributions.detection_law.build(self.platform.mu_d, LawRole.DETECTION_LATENCY)

    def require(self, field_name: str, command: str) -> Any:
        value = getattr(self, field_name)
        if value is None:
            raise ScenarioError(f"{field_name} fehlt (benötigt für '{command}')")
        return value


# =============================================================================
# LADEN UND SCHREIBEN
# =============================================================================

def load_scenario(document: str, source: str = "<dokument>") -> Scenario:
    """
    Liest ein YAML-Szenario. Dauern werden in Sekunden umgerechnet, unbekannte
    Felder abgelehnt, D ist standardmässig 0.
    """
    try:
        raw = yaml.safe_load(document)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", None) or str(e)
        if mark is not None:
            raise ScenarioError(f"{source}: {problem}", line=mark.line + 1, column=mark.column + 1)
        raise ScenarioError(f"{source}: {problem}")

    if not isinstance(raw, dict):
        raise ScenarioError(f"{source}: Szenario muss ein Mapping sein")

    gate = validate_params(raw.get("platform"))
    if not gate.is_valid:
        raise ScenarioError(f"{source}: " + " | ".join(f"platform.{e}" for e in gate.errors))

    try:
        scenario = Scenario.model_validate(raw)
    except ValidationError as ve:
        raise ScenarioError(f"{source}: " + " | ".join(format_validation_errors(ve)))
    logger.debug(f"Szenario '{scenario.name}' aus {source} geladen")
    return scenario


def load_scenario_file(path: str) -> Scenario:
    if not os.path.exists(path):
        raise ScenarioError(f"Szenario-Datei nicht gefunden: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return load_scenario(f.read(), source=os.path.basename(path))


def dump_scenario(scenario: Scenario) -> str:
    """Schreibt das Szenario zurück; Dauern als '<wert>s' mit exakter Darstellung."""
    data = scenario.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False, allow_unicode=True)
