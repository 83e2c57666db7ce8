import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, List, Mapping, Optional, Union

from pydantic import ValidationError

from schema.models import PlatformParams

logger = logging.getLogger(__name__)


class ModelFamily(str, Enum):
    """Welche Parameter das angeforderte Modell zusätzlich braucht."""
    LATENCY = "latency"            # Modelle mit Erkennungslatenz: lambda_d nötig
    VERIFICATION = "verification"  # Verifikationsmuster: V nötig


# =============================================================================
# RESULT DATACLASS
# =============================================================================
@dataclass
class ParamValidationResult:
    """Ergebnis der Parameterprüfung."""
    is_valid: bool
    params: Optional[PlatformParams] = None
    errors: List[str] = field(default_factory=list)

    @property
    def error_message(self) -> Optional[str]:
        return " | ".join(self.errors) if self.errors else None


# =============================================================================
# PARAM GATE
# =============================================================================
class ParamGate:
    """Prüft Plattformparameter, bevor ein Modell sie benutzt."""

    def validate(self, params: Union[PlatformParams, Mapping[str, Any], None],
                 *families: ModelFamily) -> ParamValidationResult:
        """Gibt die Parameter unverändert zurück oder meldet jede verletzte Invariante beim Namen."""
        if params is None:
            return ParamValidationResult(is_valid=False, errors=["platform fehlt"])

        if isinstance(params, PlatformParams):
            validated = params
        else:
            try:
                validated = PlatformParams.model_validate(params)
            except ValidationError as ve:
                errors = format_validation_errors(ve)
                logger.warning(f"Ungültige Plattformparameter: {' | '.join(errors)}")
                return ParamValidationResult(is_valid=False, errors=errors)

        errors = []
        if ModelFamily.LATENCY in families and validated.detection_rate is None:
            errors.append("detection_rate fehlt (benötigt für Latenzmodelle)")
        if ModelFamily.VERIFICATION in families and validated.verification_cost is None:
            errors.append("verification_cost fehlt (benötigt für Verifikationsmuster)")

        if errors:
            return ParamValidationResult(is_valid=False, errors=errors)
        return ParamValidationResult(is_valid=True, params=validated)


def format_validation_errors(ve: ValidationError) -> List[str]:
    """Formatiert Pydantic ValidationErrors als '<feld> <meldung>'."""
    messages = []
    for err in ve.errors():
        loc = ".".join(str(x) for x in err.get("loc", [])) or "dokument"
        ctx_error = (err.get("ctx") or {}).get("error")
        if ctx_error is not None:
            msg = str(ctx_error)
        elif err.get("type") == "missing":
            msg = "fehlt"
        elif err.get("type") == "extra_forbidden":
            msg = "unbekanntes Feld"
        else:
            msg = err.get("msg", "Unbekannter Fehler")
        messages.append(f"{loc} {msg}")
    return messages


def validate_params(params: Union[PlatformParams, Mapping[str, Any], None],
                    *families: ModelFamily) -> ParamValidationResult:
    return ParamGate().validate(params, *families)
