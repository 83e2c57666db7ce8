"""
Utility für das Laden der mitgelieferten Szenarien aus scenarios/.
"""

import os
import logging
from functools import lru_cache
from typing import List

import config.config as cfg
from schema.scenario import Scenario, load_scenario_file
from utils.errors import ScenarioError

logger = logging.getLogger(__name__)

SCENARIOS_DIR = cfg.FOLDERS["SCENARIOS"]


def list_bundled_scenarios() -> List[str]:
    """Namen aller mitgelieferten Szenarien (ohne .yaml), sortiert."""
    if not os.path.isdir(SCENARIOS_DIR):
        return []
    return sorted(os.path.splitext(f)[0] for f in os.listdir(SCENARIOS_DIR) if f.endswith(".yaml"))


@lru_cache(maxsize=16)
def load_bundled_scenario(name: str) -> Scenario:
    """
    Lädt ein mitgeliefertes Szenario.

    Args:
        name: Dateiname ohne .yaml, z.B. "latency_slow_io" für scenarios/latency_slow_io.yaml

    Raises:
        ScenarioError: Wenn das Szenario nicht existiert oder ungültig ist
    """
    path = os.path.join(SCENARIOS_DIR, f"{name}.yaml")
    if not os.path.exists(path):
        logger.error(f"Szenario nicht gefunden: {path}")
        raise ScenarioError(f"Szenario '{name}' nicht gefunden in {SCENARIOS_DIR}")
    scenario = load_scenario_file(path)
    logger.debug(f"Szenario '{name}' geladen")
    return scenario


def resolve_scenario(reference: str) -> Scenario:
    """Pfad zu einer YAML-Datei oder Name eines mitgelieferten Szenarios."""
    if os.path.exists(reference) or reference.endswith((".yaml", ".yml")):
        return load_scenario_file(reference)
    return load_bundled_scenario(reference)


def reload_scenarios():
    """Leert den Szenario-Cache, um Änderungen zu übernehmen."""
    load_bundled_scenario.cache_clear()
    logger.info("Szenario-Cache geleert")
