import math
from enum import Enum
from typing import Any, Callable, Optional

import numpy as np
from pydantic import (AfterValidator, BaseModel, BeforeValidator, ConfigDict, Field,
                      PlainSerializer, PositiveInt, model_validator)
from scipy import stats
from scipy.special import gamma
from typing_extensions import Annotated

from schema.units import format_duration, parse_duration, parse_rate
from utils.errors import MissingParameterError

#--- 1. Helper Funktionen ---

def ensure_non_negative(v: float) -> float:
    """Kosten dürfen 0 sein, aber nicht negativ oder unendlich."""
    if math.isnan(v) or v < 0:
        raise ValueError("negativ")
    if not math.isfinite(v):
        raise ValueError("nicht endlich")
    return v


def ensure_positive_rate(v: float) -> float:
    """Raten strikt positiv, und 1/rate muss endlich bleiben."""
    if math.isnan(v) or v <= 0:
        raise ValueError("muss positiv sein")
    if not math.isfinite(v) or not math.isfinite(1.0 / v):
        raise ValueError("Kehrwert nicht endlich")
    return v


def ensure_positive(v: float) -> float:
    if math.isnan(v) or v <= 0 or not math.isfinite(v):
        raise ValueError("muss positiv und endlich sein")
    return v


#--- 2. Annotated Typen ---

# Dauer in Sekunden; akzeptiert "600s", "10d", ... und wird mit Einheit zurückgeschrieben
DurationType = Annotated[
    float,
    BeforeValidator(parse_duration),
    AfterValidator(ensure_non_negative),
    PlainSerializer(format_duration, return_type=str, when_used="json"),
]
PositiveDurationType = Annotated[
    float,
    BeforeValidator(parse_duration),
    AfterValidator(ensure_positive),
    PlainSerializer(format_duration, return_type=str, when_used="json"),
]
RateType = Annotated[float, BeforeValidator(parse_rate), AfterValidator(ensure_positive_rate)]


#--- 3. Modelle ---

class PlatformParams(BaseModel):
    """Kosten- und Ratenparameter der Plattform. Unveränderlich nach Konstruktion."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    checkpoint_cost: DurationType = Field(description="C: Dauer eines Checkpoints")
    recovery_cost: DurationType = Field(description="R: Dauer einer Wiederherstellung")
    downtime: DurationType = Field(default=0.0, description="D: fehlerfreie Ausfallzeit")
    verification_cost: Optional[DurationType] = Field(default=None, description="V: Dauer einer Verifikation")
    error_rate: RateType = Field(description="lambda_e in 1/s")
    detection_rate: Optional[RateType] = Field(default=None, description="lambda_d in 1/s")

    @property
    def mu_e(self) -> float:
        return 1.0 / self.error_rate

    @property
    def mu_d(self) -> Optional[float]:
        if self.detection_rate is None:
            return None
        return 1.0 / self.detection_rate

    def require_detection(self, model: str = "Latenzmodell") -> float:
        """Gibt mu_d zurück oder meldet das fehlende lambda_d."""
        if self.detection_rate is None:
            raise MissingParameterError("detection_rate", model)
        return 1.0 / self.detection_rate

    def require_verification(self, model: str = "Verifikationsmuster") -> float:
        if self.verification_cost is None:
            raise MissingParameterError("verification_cost", model)
        return self.verification_cost


class WorkloadSpec(BaseModel):
    """Gesamtarbeit W und optional die Aufteilung in n gleich grosse Chunks."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    total_work: PositiveDurationType = Field(description="W: fehlerfreie Rechenzeit")
    chunk_count: Optional[PositiveInt] = Field(default=None, description="n")

    @property
    def chunk_work(self) -> Optional[float]:
        if self.chunk_count is None:
            return None
        return self.total_work / self.chunk_count

    def with_chunks(self, chunk_count: int) -> "WorkloadSpec":
        return self.model_copy(update={"chunk_count": chunk_count})


class LawFamily(str, Enum):
    EXPONENTIAL = "exponential"
    WEIBULL = "weibull"


class LawRole(str, Enum):
    ERROR_ARRIVAL = "error_arrival"
    DETECTION_LATENCY = "detection_latency"


class DistributionSpec(BaseModel):
    """
    Verteilungsgesetz für Fehlerankünfte (X_e) oder Erkennungslatenzen (X_d).

    Exponential braucht `rate`, Weibull braucht `shape` und `scale`.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    family: LawFamily
    role: LawRole
    rate: Optional[RateType] = None
    shape: Optional[float] = None
    scale: Optional[PositiveDurationType] = None

    @model_validator(mode="after")
    def check_parameters(self) -> "DistributionSpec":
        if self.family is LawFamily.EXPONENTIAL:
            if self.rate is None:
                raise ValueError("Exponentialverteilung braucht 'rate'")
            if self.shape is not None or self.scale is not None:
                raise ValueError("Exponentialverteilung erlaubt nur 'rate'")
        else:
            if self.shape is None or not (self.shape > 0 and math.isfinite(self.shape)):
                raise ValueError("Weibull 'shape' muss positiv sein")
            if self.scale is None:
                raise ValueError("Weibull braucht 'scale'")
            if self.rate is not None:
                raise ValueError("Weibull erlaubt kein 'rate'")
        return self

    @classmethod
    def exponential(cls, rate: float, role: LawRole) -> "DistributionSpec":
        return cls(family=LawFamily.EXPONENTIAL, role=role, rate=rate)

    @classmethod
    def weibull_with_mean(cls, shape: float, mean: float, role: LawRole) -> "DistributionSpec":
        """Weibull mit vorgegebenem Mittelwert: scale = mean / Gamma(1 + 1/shape)."""
        if not shape > 0:
            raise ValueError("Weibull 'shape' muss positiv sein")
        return cls(family=LawFamily.WEIBULL, role=role, shape=shape,
                   scale=mean / float(gamma(1.0 + 1.0 / shape)))

    @property
    def mean(self) -> float:
        if self.family is LawFamily.EXPONENTIAL:
            return 1.0 / self.rate
        return self.scale * float(gamma(1.0 + 1.0 / self.shape))

    def frozen_law(self):
        """scipy.stats Objekt für CDF und Survival."""
        if self.family is LawFamily.EXPONENTIAL:
            return stats.expon(scale=1.0 / self.rate)
        return stats.weibull_min(c=self.shape, scale=self.scale)

    def cdf(self, x):
        return self.frozen_law().cdf(x)

    def sf(self, x):
        return self.frozen_law().sf(x)

    def sampler(self, rng: np.random.Generator) -> Callable[[], float]:
        """
        Liefert eine Funktion, die eine Stichprobe zieht.

        Beide Familien transformieren dieselbe Standard-Exponentialvariable, so
        dass Weibull mit shape=1 exakt dieselben Werte wie Exponential liefert.
        """
        draw = rng.standard_exponential
        if self.family is LawFamily.EXPONENTIAL:
            mean = 1.0 / self.rate
            return lambda: draw() * mean
        scale = self.scale
        inv_shape = 1.0 / self.shape
        if inv_shape == 1.0:
            return lambda: draw() * scale
        return lambda: scale * draw() ** inv_shape

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> Any:
        base = rng.standard_exponential(size)
        if self.family is LawFamily.EXPONENTIAL:
            return base * (1.0 / self.rate)
        return self.scale * base ** (1.0 / self.shape)


class WasteBreakdown(BaseModel):
    """Zerlegung der Verschwendung: total = fail + ff - fail*ff."""
    model_config = ConfigDict(frozen=True)

    waste_ff: float = Field(description="fehlerfreier Anteil (Checkpoints, Verifikationen)")
    waste_fail: float = Field(description="durch Fehler verlorener Anteil")
    waste_total: float
    time_lost_per_error: float = Field(description="F in Sekunden")

    @model_validator(mode="after")
    def check_recomposition(self) -> "WasteBreakdown":
        if not 0.0 <= self.waste_ff < 1.0:
            raise ValueError(f"waste_ff ausserhalb [0,1): {self.waste_ff!r}")
        if self.waste_fail < 0.0:
            raise ValueError(f"waste_fail negativ: {self.waste_fail!r}")
        composed = self.waste_fail + self.waste_ff - self.waste_fail * self.waste_ff
        if abs(self.waste_total - composed) > 1e-12 * max(abs(composed), 1e-3):
            raise ValueError(f"waste_total {self.waste_total!r} != {composed!r}")
        return self

    @classmethod
    def compose(cls, waste_ff: float, waste_fail: float, time_lost_per_error: float) -> "WasteBreakdown":
        total = waste_fail + waste_ff - waste_fail * waste_ff
        return cls(waste_ff=waste_ff, waste_fail=waste_fail, waste_total=total,
                   time_lost_per_error=time_lost_per_error)
