"""Initial membership: random centers or k-means++ seeding.

Both return a 1-based assignment built by nearest-center labeling with
plain Euclidean distance; model-aware costs only start with the engine
passes. Cluster i corresponds to the i-th chosen center, which is what
binds positional family lists to clusters.
"""

from __future__ import annotations

import numpy as np

__all__ = ["init_random", "init_kmeanspp"]


def _nearest(data: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = ((data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    # argmin returns the first minimum: ties go to the lowest center index
    return d2.argmin(axis=1).astype(np.int32) + 1


def init_random(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k distinct rows drawn uniformly as centers, then nearest-center labels."""
    n = data.shape[0]
    if k > n:
        raise ValueError(f"cannot seed {k} clusters from {n} points")
    centers = rng.permutation(n)[:k]
    return _nearest(data, data[centers])


def init_kmeanspp(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Squared-distance (D^2) seeding, then nearest-center labels.

    The first center is uniform; every next one is drawn with probability
    proportional to the squared distance from the nearest chosen center,
    via an explicit inverse-CDF scan so the draw sequence is portable.
    Should all remaining mass vanish (every point coincides with a chosen
    center), the next center falls back to a uniform unchosen row.
    """
    n = data.shape[0]
    if k > n:
        raise ValueError(f"cannot seed {k} clusters from {n} points")
    chosen = np.empty(k, dtype=np.intp)
    chosen[0] = rng.integers(n)
    d2 = ((data - data[chosen[0]]) ** 2).sum(axis=1)
    for i in range(1, k):
        cum = np.cumsum(d2)
        total = float(cum[-1])
        if total > 0.0:
            u = rng.random() * total
            j = int(np.searchsorted(cum, u, side="right"))
        else:
            unchosen = np.setdiff1d(np.arange(n), chosen[:i])
            j = int(unchosen[rng.integers(unchosen.size)])
        chosen[i] = j
        d2 = np.minimum(d2, ((data - data[j]) ** 2).sum(axis=1))
    return _nearest(data, data[chosen])
