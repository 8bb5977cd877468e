import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``seed`` and optional sub-keys.

    Sub-keys give independent, reproducible streams for retries and restarts
    without consuming draws from a shared generator.
    """
    entropy = [int(seed) & _MASK64, *(int(k) & _MASK64 for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
