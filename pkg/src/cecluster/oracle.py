"""Exhaustive verification oracles for small instances.

Everything here recomputes cluster statistics from scratch on raw rows, so
results are independent of the streaming sweep kernel they are used to check.
Labelings are 0-based arrays of block indices; block j is priced with
families[j].
"""

import math

import numpy as np

from .linalg import moments_of
from .models import Family, FamilySpec, cross_entropy

_MAX_N = 14
_MAX_K = 4
_HETERO_MAX_N = 10
_HETERO_MAX_K = 3
_BATCH_ROWS = 16384

LOG_2PI = math.log(2.0 * math.pi)


class PartitionIterator:
    """All partitions of n items into at most k blocks, canonical order.

    Yields each set partition exactly once as a restricted-growth string:
    label 0 appears first, and a new label may exceed the running maximum
    by exactly one.
    """

    def __init__(self, n: int, k: int):
        if n < 1 or n > _MAX_N:
            raise ValueError(f"oracle size exceeded: n={n}")
        if k < 1 or k > _MAX_K:
            raise ValueError(f"oracle size exceeded: k={k}")
        self.n = n
        self.k = k

    def __iter__(self):
        n, k = self.n, self.k
        labels = np.zeros(n, dtype=np.int8)
        high = np.zeros(n, dtype=np.int8)  # running max of labels[: i + 1]
        yield labels.copy()
        while True:
            i = n - 1
            while i > 0 and labels[i] == min(high[i - 1] + 1, k - 1):
                i -= 1
            if i == 0:
                return
            labels[i] += 1
            high[i] = max(high[i - 1], labels[i])
            for j in range(i + 1, n):
                labels[j] = 0
                high[j] = high[i]
            yield labels.copy()


def _too_small(spec: FamilySpec, count: int, n_dim: int) -> bool:
    """Blocks whose scatter is rank-deficient by cardinality alone.

    Fewer than n_dim + 1 points cannot span a full-rank covariance, and one
    point has zero trace and diagonal; deciding by count instead of by the
    computed determinant keeps the verdict independent of roundoff.
    """
    if spec.kind == Family.ALL:
        return count <= n_dim
    if spec.kind in (Family.SPHERICAL, Family.DIAGONAL):
        return count < 2
    return False


def energy_direct(data, labeling, families) -> float:
    """From-scratch energy of one labeling; no incremental updates anywhere."""
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    labeling = np.asarray(labeling)
    n, n_dim = X.shape
    total = 0.0
    for j, spec in enumerate(families):
        rows = np.flatnonzero(labeling == j)
        if rows.size == 0:
            continue
        if _too_small(spec, rows.size, n_dim):
            return math.inf
        m = moments_of(X, rows)
        p = rows.size / n
        h = cross_entropy(spec, m)
        if h == math.inf:
            return math.inf
        total += p * (h - math.log(p))
    return total


def _block_h(cov_stack: np.ndarray, counts: np.ndarray, spec: FamilySpec) -> np.ndarray:
    """Cross-entropy of stacked scatter matrices under one family, vectorized.

    counts gates the cardinality-degenerate cases the same way the scalar
    route does, so the two oracle routes always classify blocks alike.
    """
    n_dim = cov_stack.shape[-1]
    half = 0.5 * n_dim
    if spec.kind == Family.ALL:
        sign, logdet = np.linalg.slogdet(cov_stack)
        h = half * (LOG_2PI + 1.0) + 0.5 * logdet
        return np.where((sign > 0) & (counts > n_dim), h, np.inf)
    if spec.kind == Family.SPHERICAL:
        tr = np.trace(cov_stack, axis1=-2, axis2=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = half * math.log(2.0 * math.pi * math.e / n_dim) + half * np.log(tr)
        return np.where((tr > 0) & (counts > 1), h, np.inf)
    if spec.kind == Family.FIXED_RADIUS:
        tr = np.trace(cov_stack, axis1=-2, axis2=-1)
        return half * LOG_2PI + half * math.log(spec.r) + tr / (2.0 * spec.r)
    if spec.kind == Family.DIAGONAL:
        diag = np.diagonal(cov_stack, axis1=-2, axis2=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = half * (LOG_2PI + 1.0) + 0.5 * np.log(diag).sum(axis=-1)
        return np.where((diag > 0).all(axis=-1) & (counts > 1), h, np.inf)
    if spec.kind == Family.FIXED_COVARIANCE:
        inv = np.linalg.inv(spec.sigma)
        _, logdet = np.linalg.slogdet(spec.sigma)
        quad = np.einsum("ab,...ba->...", inv, cov_stack)
        return half * LOG_2PI + 0.5 * logdet + 0.5 * quad
    w = np.linalg.eigvalsh(cov_stack)  # ascending, matching stored lambdas
    lam = np.asarray(spec.lambdas)
    return half * LOG_2PI + 0.5 * np.log(lam).sum() + 0.5 * (w / lam).sum(axis=-1)


def batch_energies(data, labelings, families, card_min: int = 0) -> np.ndarray:
    """Energies of many labelings at once.

    labelings is (B, n) with entries in 0..k-1; blocks smaller than card_min
    (but nonempty) make a labeling infeasible (+inf), as do degenerate blocks.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    L = np.asarray(labelings)
    n, n_dim = X.shape
    k = len(families)
    onehot = (L[:, :, None] == np.arange(k)).astype(float)
    counts = onehot.sum(axis=1)
    safe = np.maximum(counts, 1.0)[:, :, None]
    means = np.einsum("bnk,nd->bkd", onehot, X) / safe
    second = np.einsum("bnk,nd,ne->bkde", onehot, X, X) / safe[..., None]
    covs = second - means[:, :, :, None] * means[:, :, None, :]

    total = np.zeros(L.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        for j, spec in enumerate(families):
            h = _block_h(covs[:, j], counts[:, j], spec)
            p = counts[:, j] / n
            term = p * (h - np.log(p))
            total = total + np.where(counts[:, j] > 0, term, 0.0)
    if card_min > 0:
        bad = ((counts > 0) & (counts < card_min)).any(axis=1)
        total = np.where(bad, np.inf, total)
    return total


def _product_labelings(n: int, k: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] // powers) % k).astype(np.int8)


def brute_force_min(data, families, k: int, card_min: int = 0):
    """Global minimum energy over all labelings, with its first minimizer.

    Same-family instances enumerate set partitions (label permutations are
    redundant); mixed families must distinguish labels and walk all k^n
    labelings, which caps the tractable size harder.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if k < 1 or len(families) != k:
        raise ValueError(f"expected {k} family specs, got {len(families)}")
    homogeneous = all(spec == families[0] for spec in families)
    if n > _MAX_N or k > _MAX_K:
        raise ValueError(f"oracle size exceeded: n={n}, k={k}")
    if not homogeneous and (n > _HETERO_MAX_N or k > _HETERO_MAX_K):
        raise ValueError(f"oracle size exceeded for mixed families: n={n}, k={k}")

    best_energy = math.inf
    best_labels = None

    def consume(stacked):
        nonlocal best_energy, best_labels
        energies = batch_energies(X, stacked, families, card_min)
        i = int(np.argmin(energies))
        if best_labels is None or energies[i] < best_energy:
            best_energy = float(energies[i])
            best_labels = stacked[i].astype(np.int32)

    if homogeneous:
        block = []
        for labels in PartitionIterator(n, k):
            block.append(labels)
            if len(block) == _BATCH_ROWS:
                consume(np.stack(block))
                block = []
        if block:
            consume(np.stack(block))
    else:
        total = k**n
        for start in range(0, total, _BATCH_ROWS):
            consume(_product_labelings(n, k, start, min(start + _BATCH_ROWS, total)))

    return best_energy, best_labels
