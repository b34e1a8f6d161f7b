import numpy as np


def derive_seed(*keys):
    """Mix integer keys into a single 63-bit seed.

    Stable across platforms and processes, unlike ``hash``.
    """
    entropy = [int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))


def rng_for(*keys):
    return np.random.default_rng(derive_seed(*keys))
