# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: initializedcheck=False
# cython: cdivision=True
"""Compiled sweep kernel.

Twin of _kernel_py.py: same state layout, same scalar operation order, no
reductions reordered, built with floating-point contraction disabled, so
results are bit-identical to the pure-Python fallback.
"""

from libc.math cimport INFINITY, fabs, log, sqrt
from libc.stdint cimport int32_t, int64_t, uint8_t

import numpy as np

cdef Py_ssize_t MAX_JACOBI_SWEEPS = 50


cdef inline double _chol_logdet(double[:, ::1] cov, Py_ssize_t n_dim,
                                double[:, ::1] lower):
    # in-place lower Cholesky into scratch; returns log det, or +inf when a
    # pivot falls to roundoff level (degenerate scatter)
    cdef double logdet = 0.0
    cdef double d, ljj, s
    cdef Py_ssize_t j, t, i
    for j in range(n_dim):
        d = cov[j, j]
        for t in range(j):
            d = d - lower[j, t] * lower[j, t]
        if d <= 1e-13 * cov[j, j]:
            return INFINITY
        logdet = logdet + log(d)
        ljj = sqrt(d)
        lower[j, j] = ljj
        for i in range(j + 1, n_dim):
            s = cov[i, j]
            for t in range(j):
                s = s - lower[i, t] * lower[j, t]
            lower[i, j] = s / ljj
    return logdet


cdef inline int _jacobi_eigenvalues(double[:, ::1] cov, Py_ssize_t n_dim,
                                    double[:, ::1] work, double[::1] vals):
    # cyclic Jacobi on a scratch copy; eigenvalues come out ascending
    cdef Py_ssize_t a, b, p, q, r, sweep
    cdef double norm2, thresh, off2, apq, tau, t, c, s, arp, arq, v
    for a in range(n_dim):
        for b in range(n_dim):
            work[a, b] = cov[a, b]
    norm2 = 0.0
    for a in range(n_dim):
        for b in range(n_dim):
            norm2 = norm2 + work[a, b] * work[a, b]
    thresh = 1e-12 * sqrt(norm2)
    for sweep in range(MAX_JACOBI_SWEEPS):
        off2 = 0.0
        for p in range(n_dim - 1):
            for q in range(p + 1, n_dim):
                off2 = off2 + 2.0 * (work[p, q] * work[p, q])
        if sqrt(off2) <= thresh:
            break
        for p in range(n_dim - 1):
            for q in range(p + 1, n_dim):
                apq = work[p, q]
                if apq == 0.0:
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
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


cdef inline double _family_h(double[:, ::1] cov, Py_ssize_t i, Py_ssize_t n_dim,
                             int32_t[::1] kind, double[::1] fconst,
                             double[::1] coeff, double[:, :, ::1] isig,
                             double[:, ::1] ilam, double[:, ::1] chol,
                             double[:, ::1] jwork, double[::1] jvals):
    cdef int32_t key = kind[i]
    cdef double logdet, tr, s, d
    cdef Py_ssize_t a, b
    if key == 0:  # every Gaussian: needs log det of the scatter
        logdet = _chol_logdet(cov, n_dim, chol)
        if logdet == INFINITY:
            return INFINITY
        return fconst[i] + 0.5 * logdet
    if key == 1:  # spherical, radius free
        tr = 0.0
        for a in range(n_dim):
            tr = tr + cov[a, a]
        if tr <= 0.0:
            return INFINITY
        return fconst[i] + coeff[i] * log(tr)
    if key == 2:  # spherical, fixed radius
        tr = 0.0
        for a in range(n_dim):
            tr = tr + cov[a, a]
        return fconst[i] + coeff[i] * tr
    if key == 3:  # diagonal
        s = 0.0
        for a in range(n_dim):
            d = cov[a, a]
            if d <= 0.0:
                return INFINITY
            s = s + log(d)
        return fconst[i] + 0.5 * s
    if key == 4:  # prescribed covariance: trace of sigma^-1 times scatter
        s = 0.0
        for a in range(n_dim):
            for b in range(n_dim):
                s = s + isig[i, a, b] * cov[a, b]
        return fconst[i] + 0.5 * s
    # prescribed eigenvalues, free rotation
    _jacobi_eigenvalues(cov, n_dim, jwork, jvals)
    s = 0.0
    for a in range(n_dim):
        s = s + jvals[a] * ilam[i, a]
    return fconst[i] + 0.5 * s


cdef inline double _term(int64_t count, int64_t n_total, double h):
    cdef double p
    if count == 0:
        return 0.0
    p = (<double> count) / (<double> n_total)
    return p * (h - log(p))


def recompute(double[:, ::1] X, int32_t[::1] memb, int64_t[::1] counts,
              double[:, ::1] means, double[:, :, ::1] covs, uint8_t[::1] alive):
    """From-scratch MLE moments per cluster; alive tracks nonemptiness."""
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_dim = X.shape[1]
    cdef Py_ssize_t k = counts.shape[0]
    cdef Py_ssize_t i, r, a, b
    cdef int32_t c
    cdef double da
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


def eval_terms(int64_t[::1] counts, double[:, :, ::1] covs, uint8_t[::1] alive,
               int32_t[::1] kind, double[::1] fconst, double[::1] coeff,
               double[:, :, ::1] isig, double[:, ::1] ilam, long long n_total,
               double[::1] terms):
    """Refresh every cached cluster term; returns the total energy."""
    cdef Py_ssize_t k = counts.shape[0]
    cdef Py_ssize_t n_dim = covs.shape[1]
    chol_arr = np.zeros((n_dim, n_dim))
    jwork_arr = np.zeros((n_dim, n_dim))
    jvals_arr = np.zeros(n_dim)
    cdef double[:, ::1] chol = chol_arr
    cdef double[:, ::1] jwork = jwork_arr
    cdef double[::1] jvals = jvals_arr
    cdef double total = 0.0
    cdef double h
    cdef Py_ssize_t i
    for i in range(k):
        if alive[i] == 0:
            terms[i] = 0.0
        else:
            h = _family_h(covs[i], i, n_dim, kind, fconst, coeff, isig, ilam,
                          chol, jwork, jvals)
            terms[i] = _term(counts[i], n_total, h)
            total = total + terms[i]
    return total


cdef inline double _sum_terms(double[::1] terms, uint8_t[::1] alive, Py_ssize_t k):
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(k):
        if alive[i] != 0:
            total = total + terms[i]
    return total


cdef inline void _add_point(double[:, ::1] X, Py_ssize_t r, int64_t count,
                            double[::1] mean_row, double[:, ::1] cov_row,
                            double[::1] out_mean, double[:, ::1] out_cov,
                            double[::1] dvec, Py_ssize_t n_dim):
    # moments after adding point r to a cluster holding `count` points
    cdef double p1 = count / (count + 1.0)
    cdef double p2 = 1.0 / (count + 1.0)
    cdef double pp = p1 * p2
    cdef Py_ssize_t a, b
    for a in range(n_dim):
        dvec[a] = mean_row[a] - X[r, a]
        out_mean[a] = p1 * mean_row[a] + p2 * X[r, a]
    for a in range(n_dim):
        for b in range(n_dim):
            out_cov[a, b] = p1 * cov_row[a, b] + pp * dvec[a] * dvec[b]


cdef inline void _remove_point(double[:, ::1] X, Py_ssize_t r, int64_t count,
                               double[::1] mean_row, double[:, ::1] cov_row,
                               double[::1] out_mean, double[:, ::1] out_cov,
                               double[::1] dvec, Py_ssize_t n_dim):
    # moments after removing point r from a cluster holding `count` points
    cdef double q1 = count / (count - 1.0)
    cdef double q2 = 1.0 / (count - 1.0)
    cdef double qq = q1 * q2
    cdef Py_ssize_t a, b
    for a in range(n_dim):
        dvec[a] = mean_row[a] - X[r, a]
        out_mean[a] = q1 * mean_row[a] - q2 * X[r, a]
    for a in range(n_dim):
        for b in range(n_dim):
            out_cov[a, b] = q1 * cov_row[a, b] - qq * dvec[a] * dvec[b]


cdef class _Scratch:
    cdef double[::1] mean1
    cdef double[:, ::1] cov1
    cdef double[::1] mean2
    cdef double[:, ::1] cov2
    cdef double[::1] dvec
    cdef double[:, ::1] chol
    cdef double[:, ::1] jwork
    cdef double[::1] jvals
    cdef int64_t[::1] s_counts
    cdef double[:, ::1] s_means
    cdef double[:, :, ::1] s_covs
    cdef double[::1] s_terms
    cdef uint8_t[::1] s_alive
    cdef int64_t[::1] victims

    def __cinit__(self, Py_ssize_t n, Py_ssize_t k, Py_ssize_t n_dim):
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


cdef int _greedy_insert(double[:, ::1] X, Py_ssize_t r, Py_ssize_t k,
                        Py_ssize_t n_dim, int64_t[::1] counts,
                        double[:, ::1] means, double[:, :, ::1] covs,
                        uint8_t[::1] alive, double[::1] terms,
                        int32_t[::1] kind, double[::1] fconst, double[::1] coeff,
                        double[:, :, ::1] isig, double[:, ::1] ilam,
                        long long n_total, Py_ssize_t skip, _Scratch sc):
    # add point r to the cluster whose term grows least; commits the insert,
    # returns the receiving cluster (or -1 when none is available)
    cdef Py_ssize_t best = -1
    cdef double best_delta = INFINITY
    cdef double h, delta
    cdef Py_ssize_t j, a, b
    for j in range(k):
        if alive[j] == 0 or j == skip:
            continue
        _add_point(X, r, counts[j], means[j], covs[j], sc.mean1, sc.cov1, sc.dvec, n_dim)
        h = _family_h(sc.cov1, j, n_dim, kind, fconst, coeff, isig, ilam,
                      sc.chol, sc.jwork, sc.jvals)
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
    h = _family_h(sc.cov1, best, n_dim, kind, fconst, coeff, isig, ilam,
                  sc.chol, sc.jwork, sc.jvals)
    terms[best] = _term(counts[best] + 1, n_total, h)
    counts[best] = counts[best] + 1
    for a in range(n_dim):
        means[best, a] = sc.mean1[a]
        for b in range(n_dim):
            covs[best, a, b] = sc.cov1[a, b]
    return <int> best


def dissolve(double[:, ::1] X, Py_ssize_t victim, int32_t[::1] memb,
             int64_t[::1] counts, double[:, ::1] means, double[:, :, ::1] covs,
             uint8_t[::1] alive, double[::1] terms, int32_t[::1] kind,
             double[::1] fconst, double[::1] coeff, double[:, :, ::1] isig,
             double[:, ::1] ilam, long long n_total, int forced, double e_in):
    """Delete a cluster and greedily reinsert its members, in index order.

    forced=0 simulates first and commits only on a strict energy decrease
    (relative tolerance 1e-12), rolling back otherwise; forced=1 commits
    unconditionally. Returns (accepted, energy_after).
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_dim = X.shape[1]
    cdef Py_ssize_t k = counts.shape[0]
    cdef _Scratch sc = _Scratch(n, k, n_dim)
    return _dissolve(X, victim, memb, counts, means, covs, alive, terms, kind,
                     fconst, coeff, isig, ilam, n_total, forced, e_in, sc)


cdef tuple _dissolve(double[:, ::1] X, Py_ssize_t victim, int32_t[::1] memb,
                     int64_t[::1] counts, double[:, ::1] means,
                     double[:, :, ::1] covs, uint8_t[::1] alive,
                     double[::1] terms, int32_t[::1] kind, double[::1] fconst,
                     double[::1] coeff, double[:, :, ::1] isig,
                     double[:, ::1] ilam, long long n_total, int forced,
                     double e_in, _Scratch sc):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_dim = X.shape[1]
    cdef Py_ssize_t k = counts.shape[0]
    cdef Py_ssize_t n_members = 0
    cdef Py_ssize_t r, i, a, b, m
    cdef int dst
    cdef double e_out
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
        dst = _greedy_insert(X, r, k, n_dim, counts, means, covs, alive, terms,
                             kind, fconst, coeff, isig, ilam, n_total, -1, sc)
        memb[r] = dst
    e_out = _sum_terms(terms, alive, k)
    if forced != 0:
        return 1, e_out
    if e_out - e_in < -1e-12 * fabs(e_in):
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


def hartigan_sweep(double[:, ::1] X, int32_t[::1] memb, int64_t[::1] counts,
                   double[:, ::1] means, double[:, :, ::1] covs,
                   uint8_t[::1] alive, double[::1] terms, int32_t[::1] kind,
                   double[::1] fconst, double[::1] coeff,
                   double[:, :, ::1] isig, double[:, ::1] ilam,
                   long long n_total, long long card_min, double e_in):
    """One pass over all points in index order; returns (changed, energy).

    A point in a cluster at the minimum cardinality cannot leave alone:
    the only candidate move is dissolving its whole cluster, gated on the
    total energy strictly decreasing. Normal moves are accepted when the
    donor term plus receiver term drops by more than 1e-12 of the current
    energy; ties keep the current cluster, tied receivers take the lowest
    index.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_dim = X.shape[1]
    cdef Py_ssize_t k = counts.shape[0]
    cdef _Scratch sc = _Scratch(n, k, n_dim)
    cdef double e_cur = e_in
    cdef int changed = 0
    cdef int accepted
    cdef Py_ssize_t r, i, j, a, b, n_alive
    cdef int32_t src
    cdef int dst
    cdef double h, hj, hb, donor_term, donor_delta, delta, best_delta
    cdef Py_ssize_t best
    cdef tuple res
    for r in range(n):
        src = memb[r]
        if src < 0:
            dst = _greedy_insert(X, r, k, n_dim, counts, means, covs, alive,
                                 terms, kind, fconst, coeff, isig, ilam,
                                 n_total, -1, sc)
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
            res = _dissolve(X, src, memb, counts, means, covs, alive, terms,
                            kind, fconst, coeff, isig, ilam, n_total, 0, e_cur, sc)
            accepted = res[0]
            e_cur = res[1]
            if accepted != 0:
                changed = 1
            continue
        # donor moments and term with r removed
        _remove_point(X, r, counts[src], means[src], covs[src], sc.mean2, sc.cov2, sc.dvec, n_dim)
        h = _family_h(sc.cov2, src, n_dim, kind, fconst, coeff, isig, ilam,
                      sc.chol, sc.jwork, sc.jvals)
        donor_term = _term(counts[src] - 1, n_total, h)
        donor_delta = donor_term - terms[src]
        best = -1
        best_delta = INFINITY
        for j in range(k):
            if j == src or alive[j] == 0:
                continue
            _add_point(X, r, counts[j], means[j], covs[j], sc.mean1, sc.cov1, sc.dvec, n_dim)
            hj = _family_h(sc.cov1, j, n_dim, kind, fconst, coeff, isig, ilam,
                           sc.chol, sc.jwork, sc.jvals)
            delta = donor_delta + (_term(counts[j] + 1, n_total, hj) - terms[j])
            if delta < best_delta:
                best_delta = delta
                best = j
        if best >= 0 and best_delta < -1e-12 * fabs(e_cur):
            # recompute the winner's candidate state (sc.cov1 may hold a later j)
            _add_point(X, r, counts[best], means[best], covs[best], sc.mean1, sc.cov1, sc.dvec, n_dim)
            hb = _family_h(sc.cov1, best, n_dim, kind, fconst, coeff, isig, ilam,
                           sc.chol, sc.jwork, sc.jvals)
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
