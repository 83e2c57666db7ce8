"""
Validation Module - Parameterprüfung und Abgleich Analytik gegen Simulation.
"""

from .param_gate import ModelFamily, ParamGate, ParamValidationResult, validate_params

__all__ = ["ModelFamily", "ParamGate", "ParamValidationResult", "validate_params"]
