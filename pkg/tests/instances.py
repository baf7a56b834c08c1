"""Random small clustering problems shared by the K-means tests."""

import numpy as np


def random_points(rng, n_max=12, d_max=3):
    n = int(rng.integers(1, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    if rng.uniform() < 0.5:
        # coarse integer grid: duplicates, exact ties and empty clusters
        return rng.integers(0, 4, size=(n, d)).astype(np.float64)
    return rng.uniform(-1, 1, size=(n, d))


def random_instance(seed, n_max=12, d_max=3, k_max=3):
    rng = np.random.default_rng(seed)
    X = random_points(rng, n_max, d_max)
    k = int(rng.integers(1, k_max + 1))
    return X, k
