"""
Exaktes Modell für exponentialverteilte Fehler und Erkennungslatenzen.

Fehler können während Arbeit, Checkpoint und Recovery auftreten, nie während
der Downtime D.
"""

import logging
import math
from dataclasses import dataclass

import config.config as cfg
from analytics.lambert import lambert_w0
from schema.models import PlatformParams, WorkloadSpec
from utils.errors import ParameterDomainError

logger = logging.getLogger(__name__)

# exp() läuft oberhalb davon über
_EXP_LIMIT = 700.0
# Unterhalb davon Reihenentwicklung statt 1/lambda - s/expm1(x)
_SERIES_LIMIT = 1e-4


@dataclass(frozen=True)
class ChunkingSolution:
    """Optimale Aufteilung der Arbeit W in n_opt Chunks."""
    n_star_real: float
    n_opt: int
    period: float
    expected_makespan: float
    degenerate: bool = False


def _exp(x: float) -> float:
    return math.exp(x) if x < _EXP_LIMIT else math.inf


def _expm1(x: float) -> float:
    return math.expm1(x) if x < _EXP_LIMIT else math.inf


def _log_expm1(x: float) -> float:
    """log(e^x - 1), stabil für kleine und grosse x."""
    if x > 30.0:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def expected_tlost(w: float, params: PlatformParams) -> float:
    """Erwartete verlorene Zeit, wenn ein Fehler innerhalb von w + C auftritt."""
    s = w + params.checkpoint_cost
    if not s > 0:
        raise ParameterDomainError("w + C muss positiv sein")
    lam = params.error_rate
    x = lam * s
    if x < _SERIES_LIMIT:
        return s * (0.5 - x / 12.0 + x ** 3 / 720.0)
    if x > _EXP_LIMIT:
        return 1.0 / lam - s * math.exp(-x)
    return 1.0 / lam - s / math.expm1(x)


def expected_rlost(params: PlatformParams) -> float:
    """Erwartete verlorene Zeit, wenn ein Fehler die Recovery trifft."""
    r = params.recovery_cost
    if r == 0.0:
        return 0.0
    lam = params.error_rate
    x = lam * r
    if x < _SERIES_LIMIT:
        return r * (0.5 - x / 12.0 + x ** 3 / 720.0)
    return 1.0 / lam - r / _expm1(x)


def expected_trec(params: PlatformParams) -> float:
    """Erwartete Dauer bis zur erfolgreichen Recovery, inklusive D."""
    mu_d = params.require_detection("expected_trec")
    lam = params.error_rate
    x = lam * params.recovery_cost
    return params.downtime * _exp(x) + _expm1(x) * (params.mu_e + mu_d)


def _prefactor(params: PlatformParams) -> float:
    mu_d = params.require_detection("exaktes Exponentialmodell")
    return _exp(params.error_rate * params.recovery_cost) * (params.downtime + params.mu_e + mu_d)


def expected_makespan_chunk(w: float, params: PlatformParams) -> float:
    """Erwartete Zeit für einen Chunk der Arbeit w mit abschliessendem Checkpoint."""
    if not w > 0:
        raise ParameterDomainError(f"w muss positiv sein, erhalten {w!r}")
    return _prefactor(params) * _expm1(params.error_rate * (w + params.checkpoint_cost))


def expected_total_makespan(workload: WorkloadSpec, n: int, params: PlatformParams) -> float:
    """K * n * (exp(lambda_e (W/n + C)) - 1) für n gleich grosse Chunks."""
    if n < 1:
        raise ParameterDomainError(f"n muss >= 1 sein, erhalten {n!r}")
    x = params.error_rate * (workload.total_work / n + params.checkpoint_cost)
    return _prefactor(params) * n * _expm1(x)


def _log_total_makespan_shape(n: int, lam: float, total_work: float, c: float) -> float:
    # log(n * expm1(x)) ohne K; K hängt nicht von n ab
    return math.log(n) + _log_expm1(lam * (total_work / n + c))


def optimal_chunks(workload: WorkloadSpec, params: PlatformParams) -> ChunkingSolution:
    """
    Optimale Chunk-Anzahl über Lambert-W.

    y = W0(-exp(-lambda_e C - 1)), n* = lambda_e W / (y + 1); ausgewertet
    werden max(1, floor(n*)) und ceil(n*), bei Gleichstand gewinnt das kleinere n.
    Das Ergebnis hängt nicht von mu_d ab.
    """
    lam = params.error_rate
    c = params.checkpoint_cost
    total_work = workload.total_work
    params.require_detection("optimal_chunks")

    def solution(n_star: float, n_opt: int, degenerate: bool) -> ChunkingSolution:
        return ChunkingSolution(
            n_star_real=n_star,
            n_opt=n_opt,
            period=total_work / n_opt + c,
            expected_makespan=expected_total_makespan(workload, n_opt, params),
            degenerate=degenerate,
        )

    if c == 0.0:
        logger.warning("C=0: kein endliches Optimum, n_opt=1 mit Degenerations-Flag")
        return solution(math.inf, 1, True)

    lam_w = lam * total_work
    y = lambert_w0(-math.exp(-lam * c - 1.0)).value
    z = 1.0 + y
    if lam_w == 0.0 or z <= 0.0:
        logger.warning("lambda_e * W unterhalb der Auflösung, n_opt=1 mit Degenerations-Flag")
        return solution(math.inf if z <= 0.0 else 0.0, 1, True)

    n_star = lam_w / z
    if not math.isfinite(n_star):
        return solution(math.inf, 1, True)

    low = max(1, math.floor(n_star))
    high = max(1, math.ceil(n_star))
    n_opt = low
    if high != low:
        cost_low = _log_total_makespan_shape(low, lam, total_work, c)
        cost_high = _log_total_makespan_shape(high, lam, total_work, c)
        # Gleichstand innerhalb TIE_RTOL -> kleineres n
        if cost_high < cost_low - cfg.TIE_RTOL:
            n_opt = high

    logger.info(f"Optimale Chunks: n*={n_star!r}, n_opt={n_opt}")
    return solution(n_star, n_opt, False)


def period_young(params: PlatformParams) -> float:
    """sqrt(2 C mu_e) + C, unabhängig von mu_d, D und R."""
    c = params.checkpoint_cost
    return math.sqrt(2.0 * c * params.mu_e) + c


def period_daly(params: PlatformParams) -> float:
    """Daly-Variante mit Recovery-Kosten: sqrt(2 C (mu_e + R)) + C."""
    c = params.checkpoint_cost
    return math.sqrt(2.0 * c * (params.mu_e + params.recovery_cost)) + c


def period_latency_naive(params: PlatformParams) -> float:
    """
    Periode, wenn man die Latenz einfach auf die MTBF aufschlägt:
    sqrt(2 C (mu_e + mu_d)) + C. Überschätzt die optimale Periode.
    """
    mu_d = params.require_detection("period_latency_naive")
    c = params.checkpoint_cost
    return math.sqrt(2.0 * c * (params.mu_e + mu_d)) + c
