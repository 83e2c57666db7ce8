"""
Simulation Module - Monte-Carlo-Läufe mit begrenztem Checkpoint-Speicher oder Verifikationsmustern.
"""

from .rng import rng_stream
from .simulator import BoundedStorageModel, PatternModel, SimConfig, SimResult, simulate

__all__ = ["rng_stream", "BoundedStorageModel", "PatternModel", "SimConfig", "SimResult", "simulate"]
