"""
Lambert-W, Hauptzweig W0, für reelle Argumente x >= -1/e.

Halley-Iteration mit Startwert aus der Reihe am Verzweigungspunkt bzw. einer
log-Schätzung für grosse x.
"""

import logging
import math
from dataclasses import dataclass

import config.config as cfg
from utils.errors import LambertConvergenceError, LambertDomainError

logger = logging.getLogger(__name__)

BRANCH_POINT = -math.exp(-1.0)


@dataclass(frozen=True)
class LambertResult:
    value: float
    iterations: int
    residual: float


def _initial_guess(x: float) -> float:
    if x < -0.32:
        # Reihe in p = sqrt(2(e*x + 1)) um den Verzweigungspunkt
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    if x < 3.0:
        return math.log1p(x)
    l1 = math.log(x)
    l2 = math.log(l1)
    return l1 - l2 + l2 / l1


def lambert_w0(x: float) -> LambertResult:
    """
    Löst w * exp(w) = x auf dem Hauptzweig (w >= -1).

    Raises:
        LambertDomainError: x < -1/e (mit 1e-15 Toleranz)
        LambertConvergenceError: keine Konvergenz innerhalb der Iterationsgrenze
    """
    x = float(x)
    if math.isnan(x):
        raise LambertDomainError("Lambert-W: Argument ist NaN")
    if x < BRANCH_POINT - cfg.LAMBERT_DOMAIN_SLACK:
        raise LambertDomainError(
            f"Lambert-W: x={x!r} liegt links vom Verzweigungspunkt -1/e={BRANCH_POINT!r}"
        )
    if x <= BRANCH_POINT:
        return LambertResult(value=-1.0, iterations=0, residual=abs(-math.exp(-1.0) - x))
    if x == 0.0:
        return LambertResult(value=0.0, iterations=0, residual=0.0)
    if math.isinf(x):
        raise LambertDomainError("Lambert-W: Argument ist unendlich")

    w = _initial_guess(x)
    tolerance = cfg.LAMBERT_TOL * max(1.0, abs(x))
    iterations = 0
    for iterations in range(1, cfg.LAMBERT_MAX_ITER + 1):
        ew = math.exp(w)
        f = w * ew - x
        w1 = w + 1.0
        if w1 == 0.0:
            break
        denom = ew * w1 - (w + 2.0) * f / (2.0 * w1)
        if denom == 0.0:
            break
        dw = f / denom
        w -= dw
        if w < -1.0:
            w = -1.0
        if abs(dw) <= 4.0 * 2.220446049250313e-16 * (1.0 + abs(w)):
            break

    residual = abs(w * math.exp(w) - x)
    if residual > tolerance:
        raise LambertConvergenceError(
            f"Lambert-W: keine Konvergenz für x={x!r} nach {iterations} Iterationen (Residuum {residual!r})"
        )
    logger.debug(f"Lambert-W({x!r}) = {w!r} nach {iterations} Iterationen")
    return LambertResult(value=w, iterations=iterations, residual=residual)
