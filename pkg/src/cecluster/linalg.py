"""Dense linear algebra over small symmetric matrices.

Everything a cluster needs to carry: maximum-likelihood first and second
moments, exact streaming updates for adding or removing sub-samples, and
the handful of matrix primitives (determinant, inverse, eigenvalues) the
model formulas consume. Matrices are plain float64 numpy arrays; dimensions
stay small, so numerical robustness beats asymptotics throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Moments",
    "moments_of",
    "merge",
    "subtract",
    "det",
    "inverse",
    "sym_eigenvalues",
]


@dataclass(frozen=True)
class Moments:
    """Sufficient statistics of a point set: cardinality, mean, covariance.

    The covariance is the divide-by-n (maximum likelihood) scatter matrix.
    ``count == 0`` uses all-zero mean and covariance sentinels.
    """

    count: int
    mean: np.ndarray
    cov: np.ndarray

    @staticmethod
    def empty(dim: int) -> "Moments":
        return Moments(0, np.zeros(dim), np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return (m + m.T) / 2.0


def moments_of(data: np.ndarray, rows=None) -> Moments:
    """MLE mean and covariance of ``data[rows]`` (all rows when omitted)."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    sel = data if rows is None else data[np.asarray(rows, dtype=np.intp)]
    if sel.shape[0] == 0:
        raise ValueError("empty sample")
    mean = sel.mean(axis=0)
    d = sel - mean
    cov = (d.T @ d) / sel.shape[0]
    return Moments(sel.shape[0], mean, _symmetrize(cov))


def merge(a: Moments, b: Moments) -> Moments:
    """Moments of the disjoint union of the two underlying sets."""
    total = a.count + b.count
    if total < 1:
        raise ValueError("merge of two empty moment sets")
    if a.count == 0:
        return Moments(b.count, b.mean.copy(), b.cov.copy())
    if b.count == 0:
        return Moments(a.count, a.mean.copy(), a.cov.copy())
    p1 = a.count / total
    p2 = b.count / total
    mean = p1 * a.mean + p2 * b.mean
    d = a.mean - b.mean
    cov = p1 * a.cov + p2 * b.cov + (p1 * p2) * np.outer(d, d)
    return Moments(total, mean, _symmetrize(cov))


def subtract(a: Moments, b: Moments) -> Moments:
    """Moments of the set difference, removing ``b``'s sub-sample from ``a``.

    ``b`` must describe a strict statistical subset of ``a``; only the counts
    can be validated here.
    """
    if a.count <= b.count:
        raise ValueError("difference would be empty or negative")
    if b.count == 0:
        return Moments(a.count, a.mean.copy(), a.cov.copy())
    rest = a.count - b.count
    q1 = a.count / rest
    q2 = b.count / rest
    mean = q1 * a.mean - q2 * b.mean
    d = a.mean - b.mean
    cov = q1 * a.cov - q2 * b.cov - (q1 * q2) * np.outer(d, d)
    return Moments(rest, mean, _symmetrize(cov))


def det(m: np.ndarray) -> float:
    """Determinant with exact sign; degenerate inputs simply return <= 0."""
    return float(np.linalg.det(np.asarray(m, dtype=float)))


def inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric matrix, symmetrized on the way out."""
    m = np.asarray(m, dtype=float)
    w = np.abs(np.linalg.eigvalsh(m))
    if w.min() <= 1e-12 * max(w.max(), 1e-300):
        raise ValueError("singular matrix")
    return _symmetrize(np.linalg.inv(m))


def sym_eigenvalues(m: np.ndarray) -> np.ndarray:
    """Real eigenvalues of a symmetric matrix, ascending."""
    return np.linalg.eigvalsh(np.asarray(m, dtype=float))
