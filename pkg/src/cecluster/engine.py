"""Cross-entropy minimization: modified Hartigan iteration with cluster
removal, a batch Lloyd variant, and the multi-restart driver.

The energy of a clustering is

    E = sum_i p_i * (-ln p_i + H(X_i, F_i)),    p_i = |X_i| / n,

the mean per-point code length when each cluster pays for its own Gaussian
model plus an identification overhead of -ln p_i. That overhead is what
makes removing a cluster profitable once it carries too few points, so a
run started with k clusters is free to converge to fewer.

Hartigan mode moves one point at a time using exact streaming moment
updates, accepting only strict energy decreases; a donor at the minimum
cardinality can only leave by dissolving its whole cluster, which is
simulated and gated on the same criterion, so the per-pass energy trace is
non-increasing by construction. Lloyd mode is the classical batch
assign-then-refit scheme with forced removals at pass end.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .backend import get_kernel
from .init import init_kmeanspp, init_random
from .linalg import Moments
from .models import LOG_2PI, FamilySpec, cross_entropy, fitted_covariance, gaussian_density, pack_families

__all__ = [
    "CecConfig",
    "CecResult",
    "NumericalError",
    "energy",
    "run",
    "run_single",
    "classify",
    "mixture_density",
    "resolve_card_min",
]


class NumericalError(RuntimeError):
    """Optimization could not reach a usable model (degenerate geometry)."""


@dataclass
class CecConfig:
    """Run parameters; `families` holds one FamilySpec per initial cluster."""

    k: int
    families: list | None = None
    max_iterations: int = 100
    card_min: str | int = "5%"
    init_method: str = "kmeans++"
    nstart: int = 1
    seed: int = 0
    method: str = "hartigan"
    workers: int = 1
    initial_membership: np.ndarray | None = None

    def resolved_families(self) -> list:
        if self.families is None:
            return [FamilySpec.all() for _ in range(self.k)]
        if len(self.families) != self.k:
            raise ValueError(f"expected {self.k} family specs, got {len(self.families)}")
        return list(self.families)


@dataclass
class CecResult:
    """Converged clustering; membership is 1-based over surviving clusters."""

    membership: np.ndarray
    probabilities: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    families: list
    energy_trace: list
    nclusters_trace: list
    iterations: int
    final_energy: float
    elapsed_seconds: float
    seed: int

    @property
    def nclusters(self) -> int:
        return len(self.probabilities)


def resolve_card_min(card_min, n: int, n_dim: int) -> int:
    """Minimum cluster size: percentage or absolute, floored at dim + 1."""
    if isinstance(card_min, str):
        text = card_min.strip()
        if not text.endswith("%"):
            raise ValueError(f"card_min string must end with '%': {card_min!r}")
        pct = float(text[:-1])
        if not 0.0 <= pct <= 100.0:
            raise ValueError(f"card_min percentage out of range: {card_min!r}")
        base = math.ceil(pct / 100.0 * n)
    else:
        base = int(card_min)
        if base < 0:
            raise ValueError("card_min must be nonnegative")
    resolved = max(base, n_dim + 1)
    if resolved > n:
        raise ValueError(f"card_min of {resolved} points exceeds dataset size {n}")
    return resolved


def energy(clusters, total_n: int) -> float:
    """Total energy of (Moments, FamilySpec) pairs; empty clusters cost 0."""
    if total_n < 1:
        raise ValueError("total_n must be positive")
    covered = sum(m.count for m, _ in clusters)
    if covered != total_n:
        raise ValueError(f"cluster counts sum to {covered}, expected {total_n}")
    total = 0.0
    for m, spec in clusters:
        if m.count == 0:
            continue
        p = m.count / total_n
        total += p * (cross_entropy(spec, m) - math.log(p))
    return total


def _as_matrix(data) -> np.ndarray:
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("data must be a 2-D matrix")
    return np.ascontiguousarray(X)


class _State:
    """One optimization run's working arrays plus the pass operations."""

    def __init__(self, X: np.ndarray, cfg: CecConfig):
        self.X = X
        self.n, self.n_dim = X.shape
        self.cfg = cfg
        self.families = cfg.resolved_families()
        self.k = cfg.k
        self.kern = get_kernel()
        pack = pack_families(self.families, self.n_dim)
        self.fkind = pack["kind"]
        self.fconst = pack["const"]
        self.fcoeff = pack["coeff"]
        self.fisig = pack["isig"]
        self.filam = pack["ilam"]
        self.card_min = resolve_card_min(cfg.card_min, self.n, self.n_dim)
        self.memb = np.empty(self.n, dtype=np.int32)
        self.counts = np.zeros(self.k, dtype=np.int64)
        self.means = np.zeros((self.k, self.n_dim))
        self.covs = np.zeros((self.k, self.n_dim, self.n_dim))
        self.alive = np.zeros(self.k, dtype=np.uint8)
        self.terms = np.zeros(self.k)

    def _pack_args(self):
        return (self.fkind, self.fconst, self.fcoeff, self.fisig, self.filam)

    def n_alive(self) -> int:
        return int(self.alive.sum())

    def refresh(self) -> float:
        """From-scratch moments and terms; returns the total energy."""
        self.kern.recompute(self.X, self.memb, self.counts, self.means, self.covs, self.alive)
        return self.kern.eval_terms(
            self.counts, self.covs, self.alive, *self._pack_args(), self.n, self.terms
        )

    def seed_membership(self, labels_1based: np.ndarray) -> float:
        """Install a 1-based labeling (0 = unassigned), dissolve undersized
        clusters by force, and return the from-scratch starting energy."""
        self.memb[:] = labels_1based.astype(np.int32) - 1
        e = self.refresh()
        while True:
            undersized = [
                i for i in range(self.k) if self.alive[i] and self.counts[i] < self.card_min
            ]
            if not undersized or self.n_alive() < 2:
                break
            victim = min(undersized, key=lambda i: (self.counts[i], i))
            _, e = self.kern.dissolve(
                self.X, victim, self.memb, self.counts, self.means, self.covs,
                self.alive, self.terms, *self._pack_args(), self.n, 1, e,
            )
        return self.refresh()

    def hartigan_pass(self, e_current: float):
        changed, e = self.kern.hartigan_sweep(
            self.X, self.memb, self.counts, self.means, self.covs, self.alive,
            self.terms, *self._pack_args(), self.n, self.card_min, e_current,
        )
        return bool(changed), e

    def _point_costs(self) -> np.ndarray:
        """-ln(p_i f_i(x)) per point and alive cluster, inf where unusable."""
        costs = np.full((self.n, self.k), np.inf)
        for i in range(self.k):
            if not self.alive[i]:
                continue
            m = Moments(int(self.counts[i]), self.means[i], self.covs[i])
            fit = fitted_covariance(self.families[i], m)
            try:
                chol = np.linalg.cholesky(fit)
            except np.linalg.LinAlgError:
                continue
            logdet = 2.0 * float(np.log(np.diagonal(chol)).sum())
            z = np.linalg.solve(chol, (self.X - self.means[i]).T)
            mahal = (z * z).sum(axis=0)
            log_p = math.log(self.counts[i] / self.n)
            costs[:, i] = -log_p + 0.5 * (self.n_dim * LOG_2PI + logdet + mahal)
        return costs

    def lloyd_pass(self, e_current: float):
        costs = self._point_costs()
        new = costs.argmin(axis=1).astype(np.int32)
        finite = np.isfinite(costs.min(axis=1))
        if not finite.all():
            raise NumericalError("no usable cluster model for some points")
        changed = bool(np.any(new != self.memb))
        self.memb[:] = new
        self.refresh()
        # forced removals at pass end, smallest cluster first; reassignment
        # reuses this pass's cost matrix with the dead column masked out
        while True:
            undersized = [
                i for i in range(self.k) if self.alive[i] and self.counts[i] < self.card_min
            ]
            if not undersized or self.n_alive() < 2:
                break
            victim = min(undersized, key=lambda i: (self.counts[i], i))
            costs[:, victim] = np.inf
            rows = self.memb == victim
            sub = costs[rows]
            if not np.isfinite(sub.min(axis=1)).all():
                raise NumericalError("no usable cluster model for some points")
            self.memb[rows] = sub.argmin(axis=1).astype(np.int32)
            changed = True
            self.refresh()
        e = self.kern.eval_terms(
            self.counts, self.covs, self.alive, *self._pack_args(), self.n, self.terms
        )
        return changed, e


def run_single(data, cfg: CecConfig, seed: int | None = None) -> CecResult:
    """One optimization run: seed, iterate passes to a fixpoint, package."""
    t0 = time.perf_counter()
    X = _as_matrix(data)
    n, n_dim = X.shape
    if n <= n_dim:
        raise ValueError("more dimensions than points")
    if cfg.k < 1:
        raise ValueError("k must be at least 1")
    if cfg.k > n:
        raise ValueError(f"cannot start {cfg.k} clusters from {n} points")
    if cfg.method not in ("hartigan", "lloyd"):
        raise ValueError(f"unknown method {cfg.method!r}")
    run_seed = cfg.seed if seed is None else seed
    state = _State(X, cfg)
    rng = np.random.default_rng(run_seed)

    e0 = math.inf
    for _ in range(10):
        if cfg.initial_membership is not None:
            labels = np.asarray(cfg.initial_membership)
            if labels.shape != (n,):
                raise ValueError("initial membership length must match the data")
            if labels.min() < 0 or labels.max() > cfg.k:
                raise ValueError("initial membership labels must lie in 0..k")
        elif cfg.init_method == "random":
            labels = init_random(X, cfg.k, rng)
        elif cfg.init_method in ("kmeans++", "kmeanspp"):
            labels = init_kmeanspp(X, cfg.k, rng)
        else:
            raise ValueError(f"unknown init method {cfg.init_method!r}")
        e0 = state.seed_membership(labels)
        if math.isfinite(e0):
            break
        if cfg.initial_membership is not None:
            break
    if not math.isfinite(e0):
        raise NumericalError("initialization produced a degenerate model after 10 attempts")

    trace = [e0]
    ntrace = [state.n_alive()]
    e = e0
    for _ in range(cfg.max_iterations):
        e = state.refresh()
        if cfg.method == "hartigan":
            changed, e = state.hartigan_pass(e)
        else:
            changed, e = state.lloyd_pass(e)
        trace.append(e)
        ntrace.append(state.n_alive())
        if not changed:
            break

    keep = [i for i in range(cfg.k) if state.alive[i]]
    relabel = np.full(cfg.k, -1, dtype=np.int32)
    for new_idx, old_idx in enumerate(keep):
        relabel[old_idx] = new_idx
    membership = relabel[state.memb] + 1
    fams = [state.families[i] for i in keep]
    fitted = np.stack(
        [
            fitted_covariance(
                state.families[i], Moments(int(state.counts[i]), state.means[i], state.covs[i])
            )
            for i in keep
        ]
    )
    return CecResult(
        membership=membership.astype(np.int64),
        probabilities=state.counts[keep] / n,
        means=state.means[keep].copy(),
        covariances=fitted,
        families=fams,
        energy_trace=[float(v) for v in trace],
        nclusters_trace=[int(v) for v in ntrace],
        iterations=len(trace) - 1,
        final_energy=float(trace[-1]),
        elapsed_seconds=time.perf_counter() - t0,
        seed=run_seed,
    )


def run(data, cfg: CecConfig) -> CecResult:
    """Best of cfg.nstart independent restarts seeded seed, seed+1, ...

    Restarts may execute on a thread pool (cfg.workers, 0 = cpu count);
    the winner is chosen by (final energy, restart index), so scheduling
    cannot influence the result.
    """
    if cfg.nstart < 1:
        raise ValueError("nstart must be at least 1")
    seeds = [cfg.seed + i for i in range(cfg.nstart)]
    results: list = [None] * cfg.nstart
    errors: list = [None] * cfg.nstart

    def one(i):
        try:
            results[i] = run_single(data, cfg, seeds[i])
        except (NumericalError, ValueError) as exc:
            errors[i] = exc

    workers = cfg.workers if cfg.workers != 0 else (os.cpu_count() or 1)
    if workers == 1 or cfg.nstart == 1:
        for i in range(cfg.nstart):
            one(i)
    else:
        with ThreadPoolExecutor(max_workers=min(workers, cfg.nstart)) as pool:
            list(pool.map(one, range(cfg.nstart)))

    best = None
    for i, res in enumerate(results):
        if res is None:
            continue
        if best is None or res.final_energy < results[best].final_energy:
            best = i
    if best is None:
        raise errors[next(i for i, e in enumerate(errors) if e is not None)]
    return results[best]


def _cluster_densities(result: CecResult, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    dens = np.full(result.nclusters, -1.0)
    for i in range(result.nclusters):
        try:
            dens[i] = result.probabilities[i] * gaussian_density(
                result.means[i], result.covariances[i], x
            )
        except ValueError:
            continue
    return dens


def classify(result: CecResult, x) -> int:
    """1-based index of the cluster maximizing p_i f_i(x); ties go low."""
    dens = _cluster_densities(result, x)
    if np.all(dens < 0.0):
        raise ValueError("no cluster has a usable covariance")
    return int(np.argmax(dens)) + 1


def mixture_density(result: CecResult, x) -> float:
    """Density of the reconstructed mixture sum p_i N(mean_i, cov_i) at x."""
    dens = _cluster_densities(result, x)
    if np.any(dens < 0.0):
        raise ValueError("singular covariance in mixture")
    return float(dens.sum())
