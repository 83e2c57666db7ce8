"""
Risiko eines nicht behebbaren Fehlers, wenn nur die letzten k Checkpoints
gespeichert werden, und die kleinste Periode T_min unter einer Risikoschwelle.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

import config.config as cfg
from analytics.exact_exponential import period_young
from analytics.firstorder_waste import period_firstorder
from schema.models import DistributionSpec, DurationType, LawFamily, PlatformParams, WorkloadSpec
from utils.errors import InfeasibleRiskError, ModelRegimeError, ParameterDomainError

logger = logging.getLogger(__name__)

NON_EXPONENTIAL_NOTE = (
    "Nur für Exponentialverteilungen exakt (Gedächtnislosigkeit); "
    "für andere Verteilungen eine Näherung"
)


class BoundedStoragePolicy(BaseModel):
    """Es werden nur die k letzten Checkpoints gehalten; Risikoschwelle epsilon."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    k: PositiveInt = Field(description="Anzahl gespeicherter Checkpoints")
    epsilon: float = Field(description="Risikoschwelle in (0,1)")
    period: Optional[DurationType] = Field(default=None, description="feste Periode T, sonst Empfehlung")

    @field_validator("epsilon")
    @classmethod
    def check_epsilon(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("muss in (0,1) liegen")
        return v

    @staticmethod
    def chunk_count(period: float, workload: WorkloadSpec, params: PlatformParams) -> float:
        """n = W / (T - C), bewusst nicht gerundet."""
        work_per_period = period - params.checkpoint_cost
        if not work_per_period > 0:
            raise ParameterDomainError(
                f"Periode {period!r}s muss grösser als checkpoint_cost {params.checkpoint_cost!r}s sein"
            )
        return workload.total_work / work_per_period


@dataclass(frozen=True)
class RiskReport:
    period: float
    p_fail: float
    p_lat: float
    p_irrec: float
    p_risk: float
    expected_executions: float
    chunk_count: float
    note: Optional[str] = None


@dataclass(frozen=True)
class RiskRecommendation:
    t_opt: float
    t_min: float
    recommended: float
    p_risk_at_recommended: float


def p_fail(period: float, params: PlatformParams, law: Optional[DistributionSpec] = None) -> float:
    """Wahrscheinlichkeit mindestens eines Fehlers in einer Periode."""
    if period < 0:
        raise ParameterDomainError(f"Periode negativ: {period!r}")
    if law is not None and law.family is not LawFamily.EXPONENTIAL:
        return float(law.cdf(period))
    rate = law.rate if law is not None else params.error_rate
    return -math.expm1(-rate * period)


def p_lat(period: float, k: int, params: PlatformParams, law: Optional[DistributionSpec] = None) -> float:
    """
    P(X_d >= (k-1) T). Obere Schranke für die Wahrscheinlichkeit, dass die
    Erkennung erst nach Verdrängung des letzten gültigen Checkpoints kommt.
    """
    if period < 0:
        raise ParameterDomainError(f"Periode negativ: {period!r}")
    if k < 1:
        raise ParameterDomainError(f"k muss >= 1 sein, erhalten {k!r}")
    horizon = (k - 1) * period
    if law is not None and law.family is not LawFamily.EXPONENTIAL:
        return float(law.sf(horizon))
    rate = law.rate if law is not None else params.detection_rate
    if rate is None:
        params.require_detection("p_lat")
    return math.exp(-rate * horizon)


def p_irrec(fail: float, lat: float) -> float:
    """Rekursion über Wiederholungen einer Periode: pf*pl / (1 - pf*(1-pl))."""
    denominator = 1.0 - fail * (1.0 - lat)
    if denominator <= 0.0:
        # pf = 1 und pl = 0: jede Periode scheitert, aber nie unwiderruflich
        return 0.0
    return min(1.0, fail * lat / denominator)


def p_risk(irrec: float, chunk_count: float) -> float:
    """1 - (1 - p_irrec)^n mit gebrochenem n."""
    if irrec >= 1.0:
        return 1.0
    return -math.expm1(chunk_count * math.log1p(-irrec))


def risk_report(period: float, policy: BoundedStoragePolicy, workload: WorkloadSpec,
                params: PlatformParams, error_law: Optional[DistributionSpec] = None,
                detection_law: Optional[DistributionSpec] = None) -> RiskReport:
    n = policy.chunk_count(period, workload, params)
    fail = p_fail(period, params, error_law)
    lat = p_lat(period, policy.k, params, detection_law)
    irrec = p_irrec(fail, lat)
    risk = p_risk(irrec, n)
    executions = math.inf if risk >= 1.0 else 1.0 / (1.0 - risk)

    note = None
    for law in (error_law, detection_law):
        if law is not None and law.family is not LawFamily.EXPONENTIAL:
            note = NON_EXPONENTIAL_NOTE
    return RiskReport(period=period, p_fail=fail, p_lat=lat, p_irrec=irrec, p_risk=risk,
                      expected_executions=executions, chunk_count=n, note=note)


def risk_curve(periods: np.ndarray, k: int, workload: WorkloadSpec, params: PlatformParams) -> dict:
    """Vektorisierte Risikokurven (Exponential) für einen Sweep über T."""
    periods = np.asarray(periods, dtype=float)
    mu_d = params.require_detection("risk_curve")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        fail = -np.expm1(-params.error_rate * periods)
        lat = np.exp(-(k - 1) * periods / mu_d)
        denominator = 1.0 - fail * (1.0 - lat)
        irrec = np.where(denominator > 0.0, np.minimum(1.0, fail * lat / denominator), 0.0)
        n = workload.total_work / (periods - params.checkpoint_cost)
        risk = np.where(irrec >= 1.0, 1.0, -np.expm1(n * np.log1p(-np.minimum(irrec, 1.0))))
    valid = periods > params.checkpoint_cost
    return {
        "p_fail": fail,
        "p_lat": lat,
        "p_irrec": irrec,
        "p_risk": np.where(valid, risk, np.nan),
    }


def waste_optimal_period(params: PlatformParams) -> float:
    """T_opt des Modells erster Ordnung; ausserhalb des Regimes Young als Rückfall."""
    try:
        return period_firstorder(params)
    except ModelRegimeError as e:
        logger.warning(f"{e} -> verwende Young-Periode")
        return period_young(params)


def solve_t_min(policy: BoundedStoragePolicy, workload: WorkloadSpec, params: PlatformParams,
                error_law: Optional[DistributionSpec] = None,
                detection_law: Optional[DistributionSpec] = None) -> float:
    """
    Kleinste Periode T (auf 1 s genau) mit p_risk(T) <= epsilon.

    Grobes Abtasten ab max(C+1, T_opt/4) aufwärts, danach Bisektion im
    einschliessenden Intervall. Keine Annahme globaler Monotonie.
    """
    epsilon = policy.epsilon
    c = params.checkpoint_cost

    def risk_at(period: float) -> float:
        return risk_report(period, policy, workload, params, error_law, detection_law).p_risk

    lower = max(c + 1.0, waste_optimal_period(params) / 4.0)
    ceiling = cfg.T_MIN_CEILING_FACTOR * params.mu_e
    if ceiling <= lower:
        ceiling = lower * cfg.T_MIN_CEILING_FACTOR
    step = max(cfg.T_MIN_RESOLUTION, (ceiling - lower) / cfg.T_MIN_SCAN_STEPS)

    if risk_at(lower) <= epsilon:
        logger.info(f"T_min: Schwelle {epsilon!r} bereits bei unterer Suchgrenze {lower!r}s erfüllt")
        return lower

    previous = lower
    best_risk = math.inf
    current = lower
    while True:
        current = min(current + step, ceiling)
        risk = risk_at(current)
        best_risk = min(best_risk, risk)
        if risk <= epsilon:
            break
        if current >= ceiling:
            raise InfeasibleRiskError(epsilon, best_risk, ceiling)
        previous = current

    # Bisektion: risk(previous) > epsilon >= risk(current)
    low, high = previous, current
    while high - low > cfg.T_MIN_RESOLUTION:
        middle = 0.5 * (low + high)
        if risk_at(middle) <= epsilon:
            high = middle
        else:
            low = middle
    logger.info(f"T_min für epsilon={epsilon!r}, k={policy.k}: {high!r}s")
    return high


def recommend_period(policy: BoundedStoragePolicy, workload: WorkloadSpec, params: PlatformParams,
                     error_law: Optional[DistributionSpec] = None,
                     detection_law: Optional[DistributionSpec] = None) -> RiskRecommendation:
    """Empfohlene Periode max(T_min, T_opt)."""
    t_opt = waste_optimal_period(params)
    t_min = solve_t_min(policy, workload, params, error_law, detection_law)
    recommended = max(t_min, t_opt)
    risk = risk_report(recommended, policy, workload, params, error_law, detection_law).p_risk
    return RiskRecommendation(t_opt=t_opt, t_min=t_min, recommended=recommended,
                              p_risk_at_recommended=risk)
