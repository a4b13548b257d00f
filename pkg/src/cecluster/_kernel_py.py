"""Pure-Python sweep kernel.

Mirror image of the compiled kernel in _kernel.pyx: same state layout, same
operation order, scalar loops only. Any numpy reduction here would change
summation order and break bit parity between the backends, so everything is
written out longhand. Slow on purpose; the compiled twin is the fast path.

State layout shared by both backends:
  X      (n, N) float64, C order
  memb   (n,)   int32, cluster index or -1 for unassigned
  counts (k,)   int64
  means  (k, N) float64
  covs   (k, N, N) float64
  alive  (k,)   uint8
  terms  (k,)   float64, cached p*(-ln p + H) per cluster
Family pack: kind/const/coeff/isig/ilam from models.pack_families.
"""

import math

import numpy as np

INF = math.inf

MAX_JACOBI_SWEEPS = 50


def _chol_logdet(cov, n_dim, lower):
    # in-place lower Cholesky into scratch; returns log det, or +inf when a
    # pivot falls to roundoff level (degenerate scatter). The relative floor
    # keeps rank-deficient matrices from slipping through as tiny positive
    # pivots and poisoning the energy with huge negative log terms.
    logdet = 0.0
    for j in range(n_dim):
        d = cov[j, j]
        for t in range(j):
            d = d - lower[j, t] * lower[j, t]
        if d <= 1e-13 * cov[j, j]:
            return INF
        logdet = logdet + math.log(d)
        ljj = math.sqrt(d)
        lower[j, j] = ljj
        for i in range(j + 1, n_dim):
            s = cov[i, j]
            for t in range(j):
                s = s - lower[i, t] * lower[j, t]
            lower[i, j] = s / ljj
    return logdet


def _jacobi_eigenvalues(cov, n_dim, work, vals):
    # cyclic Jacobi on a scratch copy; eigenvalues come out ascending
    for a in range(n_dim):
        for b in range(n_dim):
            work[a, b] = cov[a, b]
    norm2 = 0.0
    for a in range(n_dim):
        for b in range(n_dim):
            norm2 = norm2 + work[a, b] * work[a, b]
    thresh = 1e-12 * math.sqrt(norm2)
    for _ in range(MAX_JACOBI_SWEEPS):
        off2 = 0.0
        for p in range(n_dim - 1):
            for q in range(p + 1, n_dim):
                off2 = off2 + 2.0 * (work[p, q] * work[p, q])
        if math.sqrt(off2) <= thresh:
            break
        for p in range(n_dim - 1):
            for q in range(p + 1, n_dim):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                work[p, p] = work[p, p] - t * apq
                work[q, q] = work[q, q] + t * apq
                work[p, q] = 0.0
                work[q, p] = 0.0
                for r in range(n_dim):
                    if r == p or r == q:
                        continue
                    arp = work[r, p]
                    arq = work[r, q]
                    work[r, p] = c * arp - s * arq
                    work[p, r] = work[r, p]
                    work[r, q] = s * arp + c * arq
                    work[q, r] = work[r, q]
    for a in range(n_dim):
        vals[a] = work[a, a]
    # insertion sort, ascending
    for a in range(1, n_dim):
        v = vals[a]
        b = a - 1
        while b >= 0 and vals[b] > v:
            vals[b + 1] = vals[b]
            b = b - 1
        vals[b + 1] = v
    return 0


def _family_h(cov, i, n_dim, kind, const, coeff, isig, ilam, chol, jwork, jvals):
    key = kind[i]
    if key == 0:  # every Gaussian: needs log det of the scatter
        logdet = _chol_logdet(cov, n_dim, chol)
        if logdet == INF:
            return INF
        return const[i] + 0.5 * logdet
    if key == 1:  # spherical, radius free
        tr = 0.0
        for a in range(n_dim):
            tr = tr + cov[a, a]
        if tr <= 0.0:
            return INF
        return const[i] + coeff[i] * math.log(tr)
    if key == 2:  # spherical, fixed radius
        tr = 0.0
        for a in range(n_dim):
            tr = tr + cov[a, a]
        return const[i] + coeff[i] * tr
    if key == 3:  # diagonal
        s = 0.0
        for a in range(n_dim):
            d = cov[a, a]
            if d <= 0.0:
                return INF
            s = s + math.log(d)
        return const[i] + 0.5 * s
    if key == 4:  # prescribed covariance: trace of sigma^-1 times scatter
        s = 0.0
        for a in range(n_dim):
            for b in range(n_dim):
                s = s + isig[i, a, b] * cov[a, b]
        return const[i] + 0.5 * s
    # prescribed eigenvalues, free rotation
    _jacobi_eigenvalues(cov, n_dim, jwork, jvals)
    s = 0.0
    for a in range(n_dim):
        s = s + jvals[a] * ilam[i, a]
    return const[i] + 0.5 * s


def _term(count, n_total, h):
    if count == 0:
        return 0.0
    p = count / n_total
    return p * (h - math.log(p))


def recompute(X, memb, counts, means, covs, alive):
    """From-scratch MLE moments per cluster; alive tracks nonemptiness."""
    n, n_dim = X.shape
    k = counts.shape[0]
    for i in range(k):
        counts[i] = 0
        for a in range(n_dim):
            means[i, a] = 0.0
            for b in range(n_dim):
                covs[i, a, b] = 0.0
    for r in range(n):
        c = memb[r]
        if c >= 0:
            counts[c] = counts[c] + 1
            for a in range(n_dim):
                means[c, a] = means[c, a] + X[r, a]
    for i in range(k):
        if counts[i] > 0:
            alive[i] = 1
            for a in range(n_dim):
                means[i, a] = means[i, a] / counts[i]
        else:
            alive[i] = 0
    for r in range(n):
        c = memb[r]
        if c >= 0:
            for a in range(n_dim):
                da = X[r, a] - means[c, a]
                for b in range(n_dim):
                    covs[c, a, b] = covs[c, a, b] + da * (X[r, b] - means[c, b])
    for i in range(k):
        if counts[i] > 0:
            for a in range(n_dim):
                for b in range(n_dim):
                    covs[i, a, b] = covs[i, a, b] / counts[i]


def eval_terms(counts, covs, alive, kind, const, coeff, isig, ilam, n_total, terms):
    """Refresh every cached cluster term; returns the total energy."""
    k = counts.shape[0]
    n_dim = covs.shape[1]
    chol = np.zeros((n_dim, n_dim))
    jwork = np.zeros((n_dim, n_dim))
    jvals = np.zeros(n_dim)
    total = 0.0
    for i in range(k):
        if alive[i] == 0:
            terms[i] = 0.0
        else:
            h = _family_h(covs[i], i, n_dim, kind, const, coeff, isig, ilam, chol, jwork, jvals)
            terms[i] = _term(counts[i], n_total, h)
            total = total + terms[i]
    return total


def _sum_terms(terms, alive, k):
    total = 0.0
    for i in range(k):
        if alive[i] != 0:
            total = total + terms[i]
    return total


def _add_point(X, r, count, mean_row, cov_row, out_mean, out_cov, dvec, n_dim):
    # moments after adding point r to a cluster holding `count` points
    p1 = count / (count + 1.0)
    p2 = 1.0 / (count + 1.0)
    pp = p1 * p2
    for a in range(n_dim):
        dvec[a] = mean_row[a] - X[r, a]
        out_mean[a] = p1 * mean_row[a] + p2 * X[r, a]
    for a in range(n_dim):
        for b in range(n_dim):
            out_cov[a, b] = p1 * cov_row[a, b] + pp * dvec[a] * dvec[b]


def _remove_point(X, r, count, mean_row, cov_row, out_mean, out_cov, dvec, n_dim):
    # moments after removing point r from a cluster holding `count` points
    q1 = count / (count - 1.0)
    q2 = 1.0 / (count - 1.0)
    qq = q1 * q2
    for a in range(n_dim):
        dvec[a] = mean_row[a] - X[r, a]
        out_mean[a] = q1 * mean_row[a] - q2 * X[r, a]
    for a in range(n_dim):
        for b in range(n_dim):
            out_cov[a, b] = q1 * cov_row[a, b] - qq * dvec[a] * dvec[b]


def _greedy_insert(X, r, k, n_dim, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, skip, sc):
    # add point r to the cluster whose term grows least; commits the insert,
    # returns the receiving cluster (or -1 when none is available)
    best = -1
    best_delta = INF
    for j in range(k):
        if alive[j] == 0 or j == skip:
            continue
        _add_point(X, r, counts[j], means[j], covs[j], sc.mean1, sc.cov1, sc.dvec, n_dim)
        h = _family_h(sc.cov1, j, n_dim, kind, const, coeff, isig, ilam, sc.chol, sc.jwork, sc.jvals)
        delta = _term(counts[j] + 1, n_total, h) - terms[j]
        if delta < best_delta:
            best_delta = delta
            best = j
    if best < 0:
        # every candidate was infinite (cannot happen from a finite state);
        # fall back to the lowest alive index so no point is ever dropped
        for j in range(k):
            if alive[j] != 0 and j != skip:
                best = j
                break
        if best < 0:
            return -1
    _add_point(X, r, counts[best], means[best], covs[best], sc.mean1, sc.cov1, sc.dvec, n_dim)
    h = _family_h(sc.cov1, best, n_dim, kind, const, coeff, isig, ilam, sc.chol, sc.jwork, sc.jvals)
    terms[best] = _term(counts[best] + 1, n_total, h)
    counts[best] = counts[best] + 1
    for a in range(n_dim):
        means[best, a] = sc.mean1[a]
        for b in range(n_dim):
            covs[best, a, b] = sc.cov1[a, b]
    return best


class _Scratch:
    def __init__(self, n, k, n_dim):
        self.mean1 = np.zeros(n_dim)
        self.cov1 = np.zeros((n_dim, n_dim))
        self.mean2 = np.zeros(n_dim)
        self.cov2 = np.zeros((n_dim, n_dim))
        self.dvec = np.zeros(n_dim)
        self.chol = np.zeros((n_dim, n_dim))
        self.jwork = np.zeros((n_dim, n_dim))
        self.jvals = np.zeros(n_dim)
        self.s_counts = np.zeros(k, dtype=np.int64)
        self.s_means = np.zeros((k, n_dim))
        self.s_covs = np.zeros((k, n_dim, n_dim))
        self.s_terms = np.zeros(k)
        self.s_alive = np.zeros(k, dtype=np.uint8)
        self.victims = np.zeros(n, dtype=np.int64)


def dissolve(X, victim, memb, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, forced, e_in):
    """Delete a cluster and greedily reinsert its members, in index order.

    forced=0 simulates first and commits only on a strict energy decrease
    (relative tolerance 1e-12), rolling back otherwise; forced=1 commits
    unconditionally. Returns (accepted, energy_after).
    """
    n, n_dim = X.shape
    k = counts.shape[0]
    sc = _Scratch(n, k, n_dim)
    return _dissolve(X, victim, memb, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, forced, e_in, sc)


def _dissolve(X, victim, memb, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, forced, e_in, sc):
    n, n_dim = X.shape
    k = counts.shape[0]
    n_members = 0
    for r in range(n):
        if memb[r] == victim:
            sc.victims[n_members] = r
            n_members = n_members + 1
    if forced == 0:
        for i in range(k):
            sc.s_counts[i] = counts[i]
            sc.s_terms[i] = terms[i]
            sc.s_alive[i] = alive[i]
            for a in range(n_dim):
                sc.s_means[i, a] = means[i, a]
                for b in range(n_dim):
                    sc.s_covs[i, a, b] = covs[i, a, b]
    alive[victim] = 0
    counts[victim] = 0
    terms[victim] = 0.0
    for m in range(n_members):
        r = sc.victims[m]
        dst = _greedy_insert(
            X, r, k, n_dim, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, -1, sc
        )
        memb[r] = dst
    e_out = _sum_terms(terms, alive, k)
    if forced != 0:
        return 1, e_out
    if e_out - e_in < -1e-12 * math.fabs(e_in):
        return 1, e_out
    # roll back
    for i in range(k):
        counts[i] = sc.s_counts[i]
        terms[i] = sc.s_terms[i]
        alive[i] = sc.s_alive[i]
        for a in range(n_dim):
            means[i, a] = sc.s_means[i, a]
            for b in range(n_dim):
                covs[i, a, b] = sc.s_covs[i, a, b]
    for m in range(n_members):
        memb[sc.victims[m]] = victim
    return 0, e_in


def hartigan_sweep(X, memb, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, card_min, e_in):
    """One pass over all points in index order; returns (changed, energy).

    A point in a cluster at the minimum cardinality cannot leave alone:
    the only candidate move is dissolving its whole cluster, gated on the
    total energy strictly decreasing. Normal moves are accepted when the
    donor term plus receiver term drops by more than 1e-12 of the current
    energy; ties keep the current cluster, tied receivers take the lowest
    index.
    """
    n, n_dim = X.shape
    k = counts.shape[0]
    sc = _Scratch(n, k, n_dim)
    e_cur = e_in
    changed = 0
    for r in range(n):
        src = memb[r]
        if src < 0:
            dst = _greedy_insert(
                X, r, k, n_dim, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, -1, sc
            )
            if dst >= 0:
                memb[r] = dst
                changed = 1
                e_cur = _sum_terms(terms, alive, k)
            continue
        n_alive = 0
        for i in range(k):
            if alive[i] != 0:
                n_alive = n_alive + 1
        if n_alive < 2:
            continue
        if counts[src] <= card_min:
            accepted, e_cur = _dissolve(
                X, src, memb, counts, means, covs, alive, terms, kind, const, coeff, isig, ilam, n_total, 0, e_cur, sc
            )
            if accepted != 0:
                changed = 1
            continue
        # donor moments and term with r removed
        _remove_point(X, r, counts[src], means[src], covs[src], sc.mean2, sc.cov2, sc.dvec, n_dim)
        h = _family_h(sc.cov2, src, n_dim, kind, const, coeff, isig, ilam, sc.chol, sc.jwork, sc.jvals)
        donor_term = _term(counts[src] - 1, n_total, h)
        donor_delta = donor_term - terms[src]
        best = -1
        best_delta = INF
        for j in range(k):
            if j == src or alive[j] == 0:
                continue
            _add_point(X, r, counts[j], means[j], covs[j], sc.mean1, sc.cov1, sc.dvec, n_dim)
            hj = _family_h(sc.cov1, j, n_dim, kind, const, coeff, isig, ilam, sc.chol, sc.jwork, sc.jvals)
            delta = donor_delta + (_term(counts[j] + 1, n_total, hj) - terms[j])
            if delta < best_delta:
                best_delta = delta
                best = j
        if best >= 0 and best_delta < -1e-12 * math.fabs(e_cur):
            # recompute the winner's candidate state (sc.cov1 may hold a later j)
            _add_point(X, r, counts[best], means[best], covs[best], sc.mean1, sc.cov1, sc.dvec, n_dim)
            hb = _family_h(sc.cov1, best, n_dim, kind, const, coeff, isig, ilam, sc.chol, sc.jwork, sc.jvals)
            terms[best] = _term(counts[best] + 1, n_total, hb)
            counts[best] = counts[best] + 1
            for a in range(n_dim):
                means[best, a] = sc.mean1[a]
                for b in range(n_dim):
                    covs[best, a, b] = sc.cov1[a, b]
            terms[src] = donor_term
            counts[src] = counts[src] - 1
            for a in range(n_dim):
                means[src, a] = sc.mean2[a]
                for b in range(n_dim):
                    covs[src, a, b] = sc.cov2[a, b]
            memb[r] = best
            changed = 1
            e_cur = _sum_terms(terms, alive, k)
    return changed, e_cur
