"""Gaussian model families and their closed-form coding costs.

Each cluster is scored by the cross entropy of its point set against the
best density inside one of six Gaussian subfamilies. All six admit closed
forms in the cluster's Moments, which is what makes per-point reassignment
cheap: no density ever has to be evaluated during optimization.

Families and their optimal covariances:

=================  ======================================  ==================
name               densities                               fitted covariance
=================  ======================================  ==================
all                every Gaussian                          scatter matrix
spherical          radius free, shape round                (trace/N) * I
fixedr             round with prescribed radius            r * I
diagonal           axis-aligned ellipsoids                 diag(scatter)
covariance         one prescribed covariance               sigma
eigenvalues        prescribed shape, free rotation         rotated lambdas
=================  ======================================  ==================
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .linalg import Moments, det, inverse, sym_eigenvalues

__all__ = [
    "Family",
    "FamilySpec",
    "cross_entropy",
    "fitted_covariance",
    "gaussian_density",
    "pack_families",
]

LOG_2PI = math.log(2.0 * math.pi)


class Family(enum.IntEnum):
    """Model family tags; the integer values double as kernel codes."""

    ALL = 0
    SPHERICAL = 1
    FIXED_RADIUS = 2
    DIAGONAL = 3
    FIXED_COVARIANCE = 4
    FIXED_EIGENVALUES = 5


_NAMES = {
    "all": Family.ALL,
    "spherical": Family.SPHERICAL,
    "fixedr": Family.FIXED_RADIUS,
    "diagonal": Family.DIAGONAL,
    "covariance": Family.FIXED_COVARIANCE,
    "eigenvalues": Family.FIXED_EIGENVALUES,
    "eigen": Family.FIXED_EIGENVALUES,
}

_CANONICAL = {
    Family.ALL: "all",
    Family.SPHERICAL: "spherical",
    Family.FIXED_RADIUS: "fixedr",
    Family.DIAGONAL: "diagonal",
    Family.FIXED_COVARIANCE: "covariance",
    Family.FIXED_EIGENVALUES: "eigenvalues",
}


class FamilySpec:
    """One family plus its fixed parameters, immutable after construction.

    Use the factory classmethods; the constructor validates parameter
    positivity and caches the inverse and log-determinant of a prescribed
    covariance so evaluation stays a trace of a product.
    """

    __slots__ = ("kind", "r", "sigma", "lambdas", "_sigma_inv", "_sigma_logdet")

    def __init__(self, kind: Family, r=None, sigma=None, lambdas=None):
        self.kind = Family(kind)
        self.r = None
        self.sigma = None
        self.lambdas = None
        self._sigma_inv = None
        self._sigma_logdet = None
        if self.kind is Family.FIXED_RADIUS:
            if r is None or not (float(r) > 0.0):
                raise ValueError("fixedr requires a radius parameter r > 0")
            self.r = float(r)
        elif self.kind is Family.FIXED_COVARIANCE:
            if sigma is None:
                raise ValueError("covariance family requires a matrix parameter")
            sigma = np.array(sigma, dtype=float)
            if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
                raise ValueError("covariance parameter must be square")
            sigma = (sigma + sigma.T) / 2.0
            w = sym_eigenvalues(sigma)
            if w.min() <= 1e-12 * max(np.trace(sigma), 0.0):
                raise ValueError("covariance parameter must be positive definite")
            sigma.setflags(write=False)
            self.sigma = sigma
            self._sigma_inv = inverse(sigma)
            self._sigma_inv.setflags(write=False)
            self._sigma_logdet = float(np.log(w).sum())
        elif self.kind is Family.FIXED_EIGENVALUES:
            if lambdas is None:
                raise ValueError("eigenvalues family requires a list of eigenvalues")
            lam = np.sort(np.array(lambdas, dtype=float))
            if lam.size < 1 or lam[0] <= 0.0:
                raise ValueError("eigenvalues must be strictly positive")
            lam.setflags(write=False)
            self.lambdas = lam
        elif r is not None or sigma is not None or lambdas is not None:
            raise ValueError(f"family {self.kind.name} takes no parameter")

    # factories
    @classmethod
    def all(cls):
        return cls(Family.ALL)

    @classmethod
    def spherical(cls):
        return cls(Family.SPHERICAL)

    @classmethod
    def fixed_radius(cls, r: float):
        return cls(Family.FIXED_RADIUS, r=r)

    @classmethod
    def diagonal(cls):
        return cls(Family.DIAGONAL)

    @classmethod
    def fixed_covariance(cls, sigma):
        return cls(Family.FIXED_COVARIANCE, sigma=sigma)

    @classmethod
    def fixed_eigenvalues(cls, lambdas):
        return cls(Family.FIXED_EIGENVALUES, lambdas=lambdas)

    @classmethod
    def from_name(cls, name: str, param=None):
        """Build a spec from its CLI name and optional parameter."""
        try:
            kind = _NAMES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown model type {name!r}") from None
        if kind is Family.FIXED_RADIUS:
            if param is None:
                raise ValueError("fixedr requires a parameter")
            return cls(kind, r=np.asarray(param, dtype=float).reshape(()))
        if kind is Family.FIXED_COVARIANCE:
            return cls(kind, sigma=param)
        if kind is Family.FIXED_EIGENVALUES:
            return cls(kind, lambdas=param)
        if param is not None:
            raise ValueError(f"model type {name!r} takes no parameter")
        return cls(kind)

    @property
    def name(self) -> str:
        return _CANONICAL[self.kind]

    @property
    def dim(self):
        """Dimension pinned by the parameters, or None when free."""
        if self.sigma is not None:
            return self.sigma.shape[0]
        if self.lambdas is not None:
            return self.lambdas.shape[0]
        return None

    def __eq__(self, other):
        if not isinstance(other, FamilySpec):
            return NotImplemented
        if self.kind != other.kind:
            return False
        if self.kind is Family.FIXED_RADIUS:
            return self.r == other.r
        if self.kind is Family.FIXED_COVARIANCE:
            return np.array_equal(self.sigma, other.sigma)
        if self.kind is Family.FIXED_EIGENVALUES:
            return np.array_equal(self.lambdas, other.lambdas)
        return True

    def __hash__(self):
        key = self.r
        if self.sigma is not None:
            key = self.sigma.tobytes()
        elif self.lambdas is not None:
            key = self.lambdas.tobytes()
        return hash((self.kind, key))

    def __repr__(self):
        if self.kind is Family.FIXED_RADIUS:
            return f"FamilySpec(fixedr, r={self.r})"
        if self.kind is Family.FIXED_COVARIANCE:
            return f"FamilySpec(covariance, {self.sigma.shape[0]}x{self.sigma.shape[0]})"
        if self.kind is Family.FIXED_EIGENVALUES:
            return f"FamilySpec(eigenvalues, {list(self.lambdas)})"
        return f"FamilySpec({self.name})"


def _check_dim(spec: FamilySpec, n_dim: int) -> None:
    if spec.dim is not None and spec.dim != n_dim:
        raise ValueError(
            f"family parameter dimension {spec.dim} does not match data dimension {n_dim}"
        )


def cross_entropy(spec: FamilySpec, m: Moments) -> float:
    """Cross entropy of the sample against the family's best density.

    Returns math.inf when the closed form is undefined (degenerate scatter
    for the families whose cost involves its determinant, trace, or
    diagonal); the engine treats that as a forbidden state, not an error.
    """
    if m.count < 1:
        raise ValueError("cross entropy of an empty sample")
    n_dim = m.dim
    _check_dim(spec, n_dim)
    c = m.cov
    kind = spec.kind
    if kind is Family.ALL:
        d = det(c)
        if d <= 0.0:
            return math.inf
        return 0.5 * n_dim * (LOG_2PI + 1.0) + 0.5 * math.log(d)
    if kind is Family.SPHERICAL:
        tr = float(np.trace(c))
        if tr <= 0.0:
            return math.inf
        return 0.5 * n_dim * (LOG_2PI + 1.0 - math.log(n_dim)) + 0.5 * n_dim * math.log(tr)
    if kind is Family.FIXED_RADIUS:
        tr = float(np.trace(c))
        return 0.5 * n_dim * (LOG_2PI + math.log(spec.r)) + tr / (2.0 * spec.r)
    if kind is Family.DIAGONAL:
        dg = np.diagonal(c)
        if np.any(dg <= 0.0):
            return math.inf
        return 0.5 * n_dim * (LOG_2PI + 1.0) + 0.5 * float(np.log(dg).sum())
    if kind is Family.FIXED_COVARIANCE:
        tr = float((spec._sigma_inv * c).sum())
        return 0.5 * n_dim * LOG_2PI + 0.5 * spec._sigma_logdet + 0.5 * tr
    # FIXED_EIGENVALUES: ascending sample eigenvalues against ascending lambdas
    lam_x = sym_eigenvalues(c)
    ratio = float((lam_x / spec.lambdas).sum())
    return 0.5 * n_dim * LOG_2PI + 0.5 * float(np.log(spec.lambdas).sum()) + 0.5 * ratio


def fitted_covariance(spec: FamilySpec, m: Moments) -> np.ndarray:
    """The family-optimal covariance for the sample.

    Degenerate scatter yields a singular matrix here rather than a sentinel;
    downstream density consumers gate on positive definiteness themselves.
    """
    if m.count < 1:
        raise ValueError("fitted covariance of an empty sample")
    n_dim = m.dim
    _check_dim(spec, n_dim)
    c = m.cov
    kind = spec.kind
    if kind is Family.ALL:
        return c.copy()
    if kind is Family.SPHERICAL:
        return (float(np.trace(c)) / n_dim) * np.eye(n_dim)
    if kind is Family.FIXED_RADIUS:
        return spec.r * np.eye(n_dim)
    if kind is Family.DIAGONAL:
        return np.diag(np.diagonal(c).copy())
    if kind is Family.FIXED_COVARIANCE:
        return spec.sigma.copy()
    # FIXED_EIGENVALUES: keep the sample's eigenbasis, swap in the prescribed
    # spectrum; eigh orders ascending, matching the lambdas' stored order.
    _, vecs = np.linalg.eigh(c)
    out = (vecs * spec.lambdas) @ vecs.T
    return (out + out.T) / 2.0


def gaussian_density(mean: np.ndarray, cov: np.ndarray, x: np.ndarray) -> float:
    """Gaussian pdf value at x; raises on a non positive definite covariance."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    x = np.asarray(x, dtype=float)
    n_dim = mean.shape[0]
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise ValueError("singular covariance") from None
    d = x - mean
    z = np.linalg.solve(chol, d)
    logdet = 2.0 * float(np.log(np.diagonal(chol)).sum())
    return math.exp(-0.5 * (n_dim * LOG_2PI + logdet + float(z @ z)))


def pack_families(families, n_dim: int) -> dict:
    """Flatten FamilySpecs into the arrays the sweep kernels consume.

    Both kernel backends read the same packed constants, so the per-family
    additive constants are computed exactly once, here.
    """
    k = len(families)
    kind = np.zeros(k, dtype=np.int32)
    const = np.zeros(k, dtype=float)
    coeff = np.zeros(k, dtype=float)
    isig = np.zeros((k, n_dim, n_dim), dtype=float)
    ilam = np.zeros((k, n_dim), dtype=float)
    for i, spec in enumerate(families):
        _check_dim(spec, n_dim)
        kind[i] = int(spec.kind)
        if spec.kind is Family.ALL or spec.kind is Family.DIAGONAL:
            const[i] = 0.5 * n_dim * (LOG_2PI + 1.0)
        elif spec.kind is Family.SPHERICAL:
            const[i] = 0.5 * n_dim * (LOG_2PI + 1.0 - math.log(n_dim))
            coeff[i] = 0.5 * n_dim
        elif spec.kind is Family.FIXED_RADIUS:
            const[i] = 0.5 * n_dim * (LOG_2PI + math.log(spec.r))
            coeff[i] = 1.0 / (2.0 * spec.r)
        elif spec.kind is Family.FIXED_COVARIANCE:
            const[i] = 0.5 * n_dim * LOG_2PI + 0.5 * spec._sigma_logdet
            isig[i] = spec._sigma_inv
        else:
            const[i] = 0.5 * n_dim * LOG_2PI + 0.5 * float(np.log(spec.lambdas).sum())
            ilam[i] = 1.0 / spec.lambdas
    return {"kind": kind, "const": const, "coeff": coeff, "isig": isig, "ilam": ilam}
