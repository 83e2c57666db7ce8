"""
Analytics Module - geschlossene Formeln für Perioden, Verschwendung, Risiko und Muster.
"""

from .bounded_risk import BoundedStoragePolicy, RiskReport, recommend_period, risk_report, solve_t_min
from .exact_exponential import ChunkingSolution, expected_makespan_chunk, optimal_chunks, period_young
from .firstorder_waste import FirstOrderReport, period_firstorder, waste_general
from .lambert import LambertResult, lambert_w0
from .patterns import PatternMode, PatternOptimum, PatternSpec, optimize_pattern, pattern_waste

__all__ = [
    "BoundedStoragePolicy", "RiskReport", "recommend_period", "risk_report", "solve_t_min",
    "ChunkingSolution", "expected_makespan_chunk", "optimal_chunks", "period_young",
    "FirstOrderReport", "period_firstorder", "waste_general",
    "LambertResult", "lambert_w0",
    "PatternMode", "PatternOptimum", "PatternSpec", "optimize_pattern", "pattern_waste",
]
