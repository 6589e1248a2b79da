import numpy as np


RNG_NAME = 'philox'
RNG_VERSION = 1


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; fixtures and manifests assume it."""
    if seed < 0:
        raise ValueError(f"negative seed '{seed}'")
    return np.random.Generator(np.random.Philox(int(seed)))


def derive_seed(seed: int, stream: int) -> int:
    """Independent child seed for sub-stream ``stream`` of ``seed``."""
    state = np.random.SeedSequence([int(seed), int(stream)]).generate_state(1, dtype=np.uint64)
    return int(state[0])
