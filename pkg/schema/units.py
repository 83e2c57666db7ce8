"""
Einheiten: Dauern werden intern immer in Sekunden geführt, Raten in 1/s.
Szenario-Dateien dürfen s, min, h, d und y (365 Tage) verwenden.
"""

import re
from typing import Any

from utils.errors import ParameterDomainError

SECONDS_PER_UNIT = {
    "s": 1.0,
    "min": 60.0,
    "h": 3600.0,
    "d": 86400.0,
    "y": 365.0 * 86400.0,
}

_NUMBER = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_DURATION_RE = re.compile(rf"^\s*({_NUMBER})\s*(s|min|h|d|y)\s*$")
_RATE_RE = re.compile(rf"^\s*({_NUMBER})\s*/\s*(.+)$")


def parse_duration(v: Any) -> float:
    """Macht aus '600s', '10d', '100y' oder einer Zahl (Sekunden) einen Float in Sekunden."""
    if isinstance(v, bool):
        raise ValueError("Dauer erwartet, bool erhalten")
    if isinstance(v, (int, float)):
        return float(v)

    s = str(v).strip()
    match = _DURATION_RE.match(s)
    if not match:
        raise ValueError(f"ungültige Dauer '{s}' (erlaubt: s, min, h, d, y)")
    value, unit = match.groups()
    return float(value) * SECONDS_PER_UNIT[unit]


def parse_rate(v: Any) -> float:
    """
    Liest eine Rate in 1/s.

    Zahlen gelten direkt als Rate pro Sekunde. '100000/100y' bedeutet
    100000 Komponenten mit je 100 Jahren MTBF, also platform_mtbf(100y, 100000).
    """
    if isinstance(v, bool):
        raise ValueError("Rate erwartet, bool erhalten")
    if isinstance(v, (int, float)):
        return float(v)

    s = str(v).strip()
    match = _RATE_RE.match(s)
    if not match:
        try:
            return float(s)
        except ValueError:
            raise ValueError(f"ungültige Rate '{s}' (Zahl in 1/s oder 'Anzahl/Dauer')")
    count, duration = match.groups()
    count_value = float(count)
    if count_value.is_integer() and count_value >= 1:
        return platform_mtbf(parse_duration(duration), int(count_value))
    mtbf = parse_duration(duration)
    if mtbf <= 0:
        raise ValueError(f"Dauer im Nenner muss positiv sein: '{s}'")
    return count_value / mtbf


def format_duration(seconds: float) -> str:
    """Kürzeste exakte Darstellung mit Einheit, z.B. 600.0 -> '600.0s'."""
    return f"{float(seconds)!r}s"


def platform_mtbf(component_mtbf: float, component_count: int) -> float:
    """
    Fehlerrate der Plattform aus MTBF und Anzahl der Komponenten.

    Gibt lambda_e = component_count / component_mtbf zurück; der Kehrwert ist
    die Plattform-MTBF mu_e.
    """
    if not component_mtbf > 0:
        raise ParameterDomainError(f"component_mtbf muss positiv sein, erhalten {component_mtbf!r}")
    if isinstance(component_count, bool) or int(component_count) != component_count or component_count < 1:
        raise ParameterDomainError(f"component_count muss eine ganze Zahl >= 1 sein, erhalten {component_count!r}")
    return int(component_count) / float(component_mtbf)
