"""
Verschwendung erster Ordnung für beliebige Verteilungen von X_e und X_d.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Optional

import numpy as np

import config.config as cfg
from schema.models import PlatformParams, WasteBreakdown
from utils.errors import ModelRegimeError, ParameterDomainError

logger = logging.getLogger(__name__)


class ValidityFlag(str, Enum):
    COSTS_SMALL = "costs_small"    # mu_d + D + R << mu_e
    PERIOD_SMALL = "period_small"  # T << mu_e


@dataclass(frozen=True)
class FirstOrderReport:
    period: float
    breakdown: WasteBreakdown
    t_opt: Optional[float]
    validity_flags: FrozenSet[ValidityFlag]

    @property
    def waste_total(self) -> float:
        return self.breakdown.waste_total


def combine_waste(waste_ff: float, waste_fail: float) -> float:
    """waste_fail + waste_ff - waste_fail * waste_ff."""
    for name, value in (("waste_ff", waste_ff), ("waste_fail", waste_fail)):
        if not 0.0 <= value <= 1.0:
            raise ParameterDomainError(f"{name} ausserhalb [0,1]: {value!r}")
    return waste_fail + waste_ff - waste_fail * waste_ff


def _validity_flags(period: float, params: PlatformParams, mu_d: float) -> FrozenSet[ValidityFlag]:
    limit = params.mu_e / cfg.REGIME_FACTOR
    flags = set()
    if mu_d + params.downtime + params.recovery_cost <= limit:
        flags.add(ValidityFlag.COSTS_SMALL)
    if period <= limit:
        flags.add(ValidityFlag.PERIOD_SMALL)
    return frozenset(flags)


def waste_general(period: float, params: PlatformParams) -> FirstOrderReport:
    """
    Verschwendung bei Periode T (Arbeit T - C, danach Checkpoint C).

    waste_total = T/(2 mu_e) + C (1 - (D+R+mu_d)/mu_e) / T + (D+R+mu_d - C/2)/mu_e
    """
    c = params.checkpoint_cost
    if not period > c:
        raise ParameterDomainError(f"Periode {period!r}s muss grösser als checkpoint_cost {c!r}s sein")
    mu_e = params.mu_e
    mu_d = params.require_detection("waste_general")
    overhead = mu_d + params.downtime + params.recovery_cost

    time_lost = period / 2.0 + overhead
    waste_ff = c / period
    waste_fail = time_lost / mu_e
    total = period / (2.0 * mu_e) + c * (1.0 - overhead / mu_e) / period + (overhead - c / 2.0) / mu_e
    breakdown = WasteBreakdown(waste_ff=waste_ff, waste_fail=waste_fail, waste_total=total,
                               time_lost_per_error=time_lost)

    flags = _validity_flags(period, params, mu_d)
    if len(flags) < 2:
        logger.warning(f"Periode {period!r}s ausserhalb des Regimes erster Ordnung: {sorted(f.value for f in flags)}")

    try:
        t_opt = period_firstorder(params)
    except ModelRegimeError:
        t_opt = None
    return FirstOrderReport(period=period, breakdown=breakdown, t_opt=t_opt, validity_flags=flags)


def period_firstorder(params: PlatformParams) -> float:
    """T_opt = sqrt(2 C (mu_e - D - R - mu_d))."""
    mu_d = params.require_detection("period_firstorder")
    radicand = params.mu_e - params.downtime - params.recovery_cost - mu_d
    if radicand <= 0:
        raise ModelRegimeError(
            f"mu_e <= D + R + mu_d (Differenz {radicand!r}s): Modell erster Ordnung ungültig, "
            "exaktes Exponentialmodell verwenden"
        )
    return math.sqrt(2.0 * params.checkpoint_cost * radicand)


def waste_curve(periods: np.ndarray, params: PlatformParams) -> np.ndarray:
    """Vektorisierte waste_total für einen Sweep über T; NaN wo T <= C."""
    periods = np.asarray(periods, dtype=float)
    c = params.checkpoint_cost
    mu_e = params.mu_e
    overhead = params.require_detection("waste_curve") + params.downtime + params.recovery_cost
    with np.errstate(divide="ignore", invalid="ignore"):
        total = periods / (2.0 * mu_e) + c * (1.0 - overhead / mu_e) / periods + (overhead - c / 2.0) / mu_e
    return np.where(periods > c, total, np.nan)


def makespan_from_waste(t_base: float, waste: float) -> float:
    """Absolute Laufzeit aus fehlerfreier Zeit und Verschwendung: T_base / (1 - waste)."""
    if not 0.0 <= waste < 1.0:
        raise ParameterDomainError(f"waste muss in [0,1) liegen, erhalten {waste!r}")
    return t_base / (1.0 - waste)
