import os
import logging
from logging.handlers import RotatingFileHandler
from dotenv import load_dotenv

# Konfiguration laden
load_dotenv(override=True)

# === Ordner Pfade ===
# Basis Pfad (Root des Projekts)
# config.py liegt in /config, also zwei Ebenen hoch für Root
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

FOLDERS = {
    "SCENARIOS": os.path.join(PROJECT_ROOT, "scenarios"),
    "TEMPLATES": os.path.join(PROJECT_ROOT, "reporting", "templates"),
    "OUTPUT": os.path.join(PROJECT_ROOT, "output"),
    "LOGS": os.path.join(PROJECT_ROOT, "logs"),
}

# === Simulation ===
# Einzige Umgebungsvariable: Standard-Anzahl der Monte-Carlo-Läufe
DEFAULT_TRIALS = int(os.getenv("CKPT_SIM_TRIALS", "2000"))
DEFAULT_SEED = 20140519
DEFAULT_WORKERS = 1
SHOW_PROGRESS = True
RUNAWAY_FACTOR = 1000.0  # max_sim_time = Faktor x fehlerfreie Laufzeit
RUNAWAY_MIN_FACTOR = 10.0

# === Modell Einstellungen ===
DEFAULT_K_MAX = 50
REGIME_FACTOR = 10.0  # "<<" Bedingungen gelten ab Faktor 10
T_MIN_CEILING_FACTOR = 10.0  # Suchgrenze fuer T_min = Faktor x mu_e
T_MIN_RESOLUTION = 1.0  # Sekunden
T_MIN_SCAN_STEPS = 2000
TIE_RTOL = 1e-12

# === Lambert-W ===
LAMBERT_MAX_ITER = 50
LAMBERT_TOL = 1e-12
LAMBERT_DOMAIN_SLACK = 1e-15

# === Ausgabe ===
DEFAULT_SWEEP_POINTS = 200
TMR_WASTE = 2.0 / 3.0  # Vergleichswert dreifache Redundanz

# === Toleranzen für "validate" ===
VALIDATION_TOLERANCES = {
    "sigma": 3.0,
    "waste_firstorder": 0.005,
    "waste_pattern": 0.01,
}

# === Logging Setup ===
LOG_FILE = os.path.join(FOLDERS["LOGS"], "simulation.log")

def setup_logging(name="SDC_Checkpoint"):
    """
    Konfiguriert das Logging mit Rotation und sauberem Format.
    """
    # Log Verzeichnis erstellen
    os.makedirs(os.path.dirname(LOG_FILE), exist_ok=True)

    logger = logging.getLogger() # Root Logger konfigurieren
    logger.setLevel(logging.INFO)

    # Verhindern dass Handler mehrfach hinzugefügt werden
    if logger.handlers:
        return logging.getLogger(name)

    # Formatierer
    formatter = logging.Formatter(
        '%(asctime)s | %(levelname)s | [%(name)s] | %(message)s'
    )

    # 1. Datei Handler mit Rotation (10 MB, 5 Backups)
    file_handler = RotatingFileHandler(
        LOG_FILE, maxBytes=10*1024*1024, backupCount=5, encoding='utf-8'
    )
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    # 2. Konsolen Handler (stderr, damit stdout fuer CSV/JSON frei bleibt)
    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    return logging.getLogger(name)
