"""
Ausgabe der Ergebnisse: CSV (pandas), JSON und Markdown-Berichte (Jinja2).

CSV: feste Spaltenreihenfolge, Kopfzeile immer vorhanden, Dezimalpunkt ".",
Zahlen in kürzester exakter Darstellung (repr).
"""

import dataclasses
import json
import logging
import math
from datetime import datetime
from enum import Enum
from typing import Any, Dict, Iterable, Mapping, Sequence, TextIO

import numpy as np
import pandas as pd
from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel

import config.config as cfg

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """Kürzeste Darstellung, die beim Einlesen denselben double ergibt."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


# =============================================================================
# CSV
# =============================================================================

def write_csv(sink: TextIO, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> int:
    """Schreibt eine Tabelle mit genau den Spalten `columns` in dieser Reihenfolge."""
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(sink, index=False, lineterminator="\n", float_format=format_float, na_rep="nan")
    logger.debug(f"CSV geschrieben: {len(frame)} Zeilen, Spalten {list(columns)}")
    return len(frame)


def write_frame(sink: TextIO, frame: pd.DataFrame) -> int:
    frame.to_csv(sink, index=False, lineterminator="\n", float_format=format_float, na_rep="nan")
    return len(frame)


# =============================================================================
# JSON
# =============================================================================

def to_jsonable(obj: Any) -> Any:
    """Wandelt Ergebnisobjekte in JSON-Typen; nicht endliche Zahlen werden null."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump())
    if isinstance(obj, pd.DataFrame):
        return to_jsonable(obj.to_dict(orient="records"))
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        data = {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
        # abgeleitete Grössen mitschreiben
        for name in dir(type(obj)):
            if isinstance(getattr(type(obj), name, None), property):
                data[name] = getattr(obj, name)
        return to_jsonable(data)
    if isinstance(obj, Mapping):
        return {str(to_jsonable(k)): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"Nicht serialisierbar: {type(obj).__name__}")


def write_json(sink: TextIO, document: Mapping[str, Any]) -> None:
    json.dump(to_jsonable(document), sink, indent=2, ensure_ascii=False, allow_nan=False)
    sink.write("\n")


# =============================================================================
# MARKDOWN-BERICHTE
# =============================================================================

def _environment() -> Environment:
    env = Environment(loader=FileSystemLoader(cfg.FOLDERS["TEMPLATES"]), keep_trailing_newline=True)
    env.filters["num"] = lambda v: "n/a" if v is None else format_float(v)
    env.filters["pct"] = lambda v: "n/a" if v is None else f"{100.0 * float(v):.2f} %"
    return env


def render_report(template_name: str, context: Dict[str, Any]) -> str:
    template = _environment().get_template(template_name)
    return template.render(**context, timestamp=datetime.now().isoformat(timespec="seconds"))


def write_report(path: str, template_name: str, context: Dict[str, Any]) -> None:
    text = render_report(template_name, context)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.info(f"Bericht geschrieben: {path}")
