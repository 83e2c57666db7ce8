import numpy as np


def rng_stream(seed: int, trial_index: int) -> np.random.Generator:
    """
    Eigener Zufallsstrom pro Lauf.

    (seed, trial_index) bestimmt den Strom vollständig, unabhängig von
    Reihenfolge und Parallelisierung.
    """
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"seed muss ein 64-Bit Wert ohne Vorzeichen sein, erhalten {seed!r}")
    if trial_index < 0:
        raise ValueError(f"trial_index negativ: {trial_index!r}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.PCG64(sequence))
