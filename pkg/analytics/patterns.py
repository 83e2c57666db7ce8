"""
Periodische Muster aus Checkpoints (C) und Verifikationen (V).

CHECKPOINT_HEAVY: k Segmente, nach jedem ein Checkpoint, vor dem letzten
Checkpoint eine Verifikation. VERIFICATION_HEAVY: k Segmente, nach jedem eine
Verifikation, am Ende ein Checkpoint. Erkennung nur durch Verifikation.

Für Periode S gilt waste_fail(S) = alpha + beta * S; zusammen mit
waste_ff = F / S (F = feste Kosten) ergibt sich waste(S) = a S + b + c / S.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt

import config.config as cfg
from schema.models import PlatformParams, PositiveDurationType, WasteBreakdown
from utils.errors import ModelRegimeError, ParameterDomainError

logger = logging.getLogger(__name__)


class PatternMode(str, Enum):
    CHECKPOINT_HEAVY = "checkpoint_heavy"        # k Checkpoints, 1 Verifikation
    VERIFICATION_HEAVY = "verification_heavy"    # k Verifikationen, 1 Checkpoint


class RollbackStrategy(str, Enum):
    LINEAR = "linear"
    BINARY_SEARCH = "binary_search"


class WasteVariant(str, Enum):
    """Vorfaktor der Verifikations-Variante: veröffentlicht 1/(2 mu_e) oder gemittelt 1/mu_e."""
    PUBLISHED = "published"
    AVERAGED = "averaged"


class PatternSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: PatternMode
    k: PositiveInt
    period: PositiveDurationType = Field(description="S: Länge des Musters")
    rollback: RollbackStrategy = RollbackStrategy.LINEAR
    variant: WasteVariant = WasteVariant.PUBLISHED

    def fixed_cost(self, params: PlatformParams) -> float:
        return fixed_cost(self.mode, self.k, params)

    def segment_work(self, params: PlatformParams) -> float:
        """w = (S - feste Kosten) / k; muss positiv sein."""
        work = (self.period - self.fixed_cost(params)) / self.k
        if not work > 0:
            raise ParameterDomainError(
                f"Periode {self.period!r}s deckt die festen Kosten {self.fixed_cost(params)!r}s nicht"
            )
        return work


@dataclass(frozen=True)
class PatternCoefficients:
    mode: PatternMode
    k: int
    a: float
    b: float
    c: float
    s_opt: float
    clamped: bool
    floor: float

    def waste(self, period: float) -> float:
        return self.a * period + self.b + self.c / period


@dataclass(frozen=True)
class PatternTableRow:
    k: int
    s_opt: Optional[float]
    waste: Optional[float]
    clamped: bool = False


@dataclass(frozen=True)
class PatternOptimum:
    mode: PatternMode
    k_opt: int
    s_opt: float
    waste: float
    table: List[PatternTableRow] = field(default_factory=list)


def fixed_cost(mode: PatternMode, k: int, params: PlatformParams) -> float:
    v = params.require_verification()
    if mode is PatternMode.CHECKPOINT_HEAVY:
        return k * params.checkpoint_cost + v
    return k * v + params.checkpoint_cost


def _check_mode(spec: PatternSpec, expected: PatternMode) -> None:
    if spec.mode is not expected:
        raise ParameterDomainError(f"Muster {spec.mode.value} statt {expected.value} übergeben")


# =============================================================================
# VERLORENE ZEIT PRO SEGMENT
# =============================================================================

def tlost_kc1v(i: int, spec: PatternSpec, params: PlatformParams) -> float:
    """
    Verlorene Zeit, wenn der Fehler in Segment i auftritt (lineares Zurückrollen).

    Ab dem letzten Checkpoint wird jeder nicht verifizierte Checkpoint geladen
    und verifiziert, bis ein korrekter gefunden ist.
    """
    _check_mode(spec, PatternMode.CHECKPOINT_HEAVY)
    k = spec.k
    if not 1 <= i <= k:
        raise ParameterDomainError(f"Segmentindex {i} ausserhalb 1..{k}")
    r = params.recovery_cost
    c = params.checkpoint_cost
    v = params.require_verification()
    w = spec.segment_work(params)
    if i == 1:
        return k * (r + w) + (k - 1) * (c + v) + v
    return (k - i + 1) * (r + v + w) + (k - i) * c + v


def tlost_kv1c(i: int, spec: PatternSpec, params: PlatformParams) -> float:
    """R + i (V + w): Recovery vom Checkpoint und Neuberechnung der ersten i Segmente."""
    _check_mode(spec, PatternMode.VERIFICATION_HEAVY)
    if not 1 <= i <= spec.k:
        raise ParameterDomainError(f"Segmentindex {i} ausserhalb 1..{spec.k}")
    return params.recovery_cost + i * (params.require_verification() + spec.segment_work(params))


# =============================================================================
# WASTE_FAIL
# =============================================================================

def waste_fail_kc1v_average(spec: PatternSpec, params: PlatformParams) -> float:
    """(D + mittlere verlorene Zeit über alle Segmente) / mu_e."""
    total = sum(tlost_kc1v(i, spec, params) for i in range(1, spec.k + 1))
    return (params.downtime + total / spec.k) / params.mu_e


def waste_fail_kc1v(spec: PatternSpec, params: PlatformParams) -> float:
    """Geschlossene Form des Mittels, lineares Zurückrollen."""
    _check_mode(spec, PatternMode.CHECKPOINT_HEAVY)
    spec.segment_work(params)
    k = spec.k
    s = spec.period
    r, c, d = params.recovery_cost, params.checkpoint_cost, params.downtime
    v = params.require_verification()
    return ((r + v) * k * k + (2 * d + r + 2 * v + s - 2 * c) * k + s - 3 * v) / (2 * k * params.mu_e)


def waste_fail_kc1v_bsearch(spec: PatternSpec, params: PlatformParams) -> float:
    """
    Obere Schranke bei binärer Suche nach dem letzten korrekten Checkpoint
    (natürlicher Logarithmus). Für k=1 gibt es nichts zu suchen: lineare Form.
    """
    _check_mode(spec, PatternMode.CHECKPOINT_HEAVY)
    k = spec.k
    if k == 1:
        return waste_fail_kc1v(spec, params)
    spec.segment_work(params)
    s = spec.period
    r, c, d = params.recovery_cost, params.checkpoint_cost, params.downtime
    v = params.require_verification()
    search = (r + v) * 2 * k * math.log(k)
    return (search + (2 * d + r + 2 * v + s - 2 * c) * k + s - 3 * v) / (2 * k * params.mu_e)


def waste_fail_kv1c(spec: PatternSpec, params: PlatformParams,
                    variant: Optional[WasteVariant] = None) -> float:
    """
    PUBLISHED: (D + R + (k+1)/(2k) (S - C)) / (2 mu_e)
    AVERAGED:  (D + R + (k+1)/(2k) (S - C)) / mu_e, das direkte Mittel von R + i(V + w) plus D
    """
    _check_mode(spec, PatternMode.VERIFICATION_HEAVY)
    spec.segment_work(params)
    variant = variant or spec.variant
    k = spec.k
    lost = params.downtime + params.recovery_cost + (k + 1) / (2 * k) * (spec.period - params.checkpoint_cost)
    if variant is WasteVariant.PUBLISHED:
        return lost / (2 * params.mu_e)
    return lost / params.mu_e


def waste_fail_pattern(spec: PatternSpec, params: PlatformParams) -> float:
    if spec.mode is PatternMode.VERIFICATION_HEAVY:
        return waste_fail_kv1c(spec, params)
    if spec.rollback is RollbackStrategy.BINARY_SEARCH:
        return waste_fail_kc1v_bsearch(spec, params)
    return waste_fail_kc1v(spec, params)


def pattern_waste(spec: PatternSpec, params: PlatformParams) -> WasteBreakdown:
    """Zerlegung der Verschwendung eines Musters bei Periode S."""
    floor = spec.fixed_cost(params)
    spec.segment_work(params)
    waste_fail = waste_fail_pattern(spec, params)
    return WasteBreakdown.compose(waste_ff=floor / spec.period, waste_fail=waste_fail,
                                  time_lost_per_error=waste_fail * params.mu_e)


# =============================================================================
# KOEFFIZIENTEN UND OPTIMIERUNG
# =============================================================================

def _affine_fail(mode: PatternMode, k: int, params: PlatformParams,
                 rollback: RollbackStrategy, variant: WasteVariant) -> Tuple[float, float]:
    """alpha, beta mit waste_fail(S) = alpha + beta S."""
    mu = params.mu_e
    r, c, d = params.recovery_cost, params.checkpoint_cost, params.downtime
    v = params.require_verification()
    if mode is PatternMode.CHECKPOINT_HEAVY:
        if rollback is RollbackStrategy.BINARY_SEARCH and k > 1:
            search = (r + v) * 2 * k * math.log(k)
        else:
            search = (r + v) * k * k
        alpha = (search + (2 * d + r + 2 * v - 2 * c) * k - 3 * v) / (2 * k * mu)
        beta = (k + 1) / (2 * k * mu)
        return alpha, beta
    factor = 1.0 / (2 * mu) if variant is WasteVariant.PUBLISHED else 1.0 / mu
    alpha = factor * (d + r - (k + 1) * c / (2 * k))
    beta = factor * (k + 1) / (2 * k)
    return alpha, beta


def pattern_coefficients(mode: PatternMode, k: int, params: PlatformParams,
                         rollback: RollbackStrategy = RollbackStrategy.LINEAR,
                         variant: WasteVariant = WasteVariant.PUBLISHED) -> PatternCoefficients:
    """
    Koeffizienten a, b, c von waste(S) = a S + b + c / S inklusive Kreuzterm
    waste_fail * waste_ff; s_opt = sqrt(c/a), nach unten begrenzt auf die festen Kosten.
    """
    if k < 1:
        raise ParameterDomainError(f"k muss >= 1 sein, erhalten {k!r}")
    floor = fixed_cost(mode, k, params)
    alpha, beta = _affine_fail(mode, k, params, rollback, variant)
    a = beta
    b = alpha - beta * floor
    c = floor * (1.0 - alpha)
    if a <= 0 or c <= 0:
        raise ModelRegimeError(
            f"k={k}: a={a!r}, c={c!r}; mu_e zu klein für das Modell erster Ordnung"
        )
    s_opt = math.sqrt(c / a)
    clamped = s_opt < floor
    if clamped:
        s_opt = floor
    return PatternCoefficients(mode=mode, k=k, a=a, b=b, c=c, s_opt=s_opt, clamped=clamped, floor=floor)


def optimize_pattern(mode: PatternMode, params: PlatformParams, k_max: int = cfg.DEFAULT_K_MAX,
                     rollback: RollbackStrategy = RollbackStrategy.LINEAR,
                     variant: WasteVariant = WasteVariant.PUBLISHED) -> PatternOptimum:
    """Durchsucht k = 1..k_max; bei Gleichstand gewinnt das kleinere k."""
    if k_max < 1:
        raise ParameterDomainError(f"k_max muss >= 1 sein, erhalten {k_max!r}")
    table = []
    best = None
    for k in range(1, k_max + 1):
        try:
            coefficients = pattern_coefficients(mode, k, params, rollback, variant)
        except ModelRegimeError as e:
            logger.debug(f"k={k} übersprungen: {e}")
            table.append(PatternTableRow(k=k, s_opt=None, waste=None))
            continue
        waste = coefficients.waste(coefficients.s_opt)
        table.append(PatternTableRow(k=k, s_opt=coefficients.s_opt, waste=waste, clamped=coefficients.clamped))
        if best is None or waste < best.waste:
            best = table[-1]

    if best is None:
        raise ModelRegimeError(f"Kein k in 1..{k_max} liefert ein gültiges Muster ({mode.value})")
    logger.info(f"Optimales Muster {mode.value}: k_opt={best.k}, S_opt={best.s_opt!r}s, waste={best.waste!r}")
    return PatternOptimum(mode=mode, k_opt=best.k, s_opt=best.s_opt, waste=best.waste, table=table)


def pattern_grid(mode: PatternMode, params: PlatformParams, verification_costs: Sequence[float],
                 k_max: int = cfg.DEFAULT_K_MAX,
                 rollback: RollbackStrategy = RollbackStrategy.LINEAR,
                 variant: WasteVariant = WasteVariant.PUBLISHED) -> List[Tuple[float, PatternTableRow]]:
    """Optimierte Verschwendung über das Gitter (V, k)."""
    rows = []
    for v in verification_costs:
        varied = params.model_copy(update={"verification_cost": float(v)})
        for k in range(1, k_max + 1):
            try:
                coefficients = pattern_coefficients(mode, k, varied, rollback, variant)
            except ModelRegimeError:
                rows.append((float(v), PatternTableRow(k=k, s_opt=None, waste=None)))
                continue
            rows.append((float(v), PatternTableRow(k=k, s_opt=coefficients.s_opt,
                                                   waste=coefficients.waste(coefficients.s_opt),
                                                   clamped=coefficients.clamped)))
    return rows


def build_spec(mode: PatternMode, k: int, period: float,
               rollback: RollbackStrategy = RollbackStrategy.LINEAR,
               variant: WasteVariant = WasteVariant.PUBLISHED) -> PatternSpec:
    return PatternSpec(mode=mode, k=k, period=period, rollback=rollback, variant=variant)
