"""Compiled inner loops for simulation and the BINAR(1) likelihood.

The likelihood kernel works in linear probability space on precomputed
binomial and bivariate-Poisson tables; the log-space reference versions
live in :mod:`minar.inference` and :mod:`minar.innovations` and the test
suite checks the two against each other.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def minar_recursion(P, N0, eps, gen):
    steps = eps.shape[0]
    d = P.shape[0]
    out = np.empty((steps + 1, d), dtype=np.int64)
    out[0, :] = N0
    for t in range(1, steps + 1):
        for i in range(d):
            s = eps[t - 1, i]
            for j in range(d):
                n = out[t - 1, j]
                p = P[i, j]
                if n == 0 or p == 0.0:
                    continue
                if p == 1.0:
                    s += n
                else:
                    s += gen.binomial(n, p)
            out[t, i] = s
    return out


@njit(cache=True)
def binomial_table(p, nmax):
    """T[n, k] = Binomial(n, p) pmf at k, for 0 <= k <= n <= nmax."""
    T = np.zeros((nmax + 1, nmax + 1))
    T[0, 0] = 1.0
    q = 1.0 - p
    for n in range(1, nmax + 1):
        T[n, 0] = T[n - 1, 0] * q
        for k in range(1, n + 1):
            T[n, k] = T[n - 1, k] * q + T[n - 1, k - 1] * p
    return T


@njit(cache=True)
def bivpois_table(lam1, lam2, phi, k1max, k2max):
    """B[k1, k2] = common-shock bivariate Poisson pmf.

    Uses k1 B[k1, k2] = (lam1 - phi) B[k1-1, k2] + phi B[k1-1, k2-1],
    which only adds positive terms.
    """
    a = lam1 - phi
    b = lam2 - phi
    B = np.zeros((k1max + 1, k2max + 1))
    B[0, 0] = math.exp(-(lam1 + lam2 - phi))
    for k2 in range(1, k2max + 1):
        B[0, k2] = B[0, k2 - 1] * b / k2
    for k1 in range(1, k1max + 1):
        B[k1, 0] = B[k1 - 1, 0] * a / k1
        for k2 in range(1, k2max + 1):
            B[k1, k2] = (a * B[k1 - 1, k2] + phi * B[k1 - 1, k2 - 1]) / k1
    return B


@njit(cache=True)
def _thinned_pmf(Ta, Tb, na, nb, nmax, out):
    # out[n] = sum_m Ta[na, m] Tb[nb, n - m]  for n <= nmax
    for n in range(nmax + 1):
        s = 0.0
        lo = n - nb
        if lo < 0:
            lo = 0
        hi = n if n < na else na
        for m in range(lo, hi + 1):
            s += Ta[na, m] * Tb[nb, n - m]
        out[n] = s


@njit(cache=True)
def transition_logprobs(prev, cur, p11, p12, p21, p22, lam1, lam2, phi):
    """Log transition probabilities for each row pair (prev[r] -> cur[r])."""
    m = prev.shape[0]
    out = np.empty(m)
    if m == 0:
        return out
    nmax = 0
    k1max = 0
    k2max = 0
    for r in range(m):
        if prev[r, 0] > nmax:
            nmax = prev[r, 0]
        if prev[r, 1] > nmax:
            nmax = prev[r, 1]
        if cur[r, 0] > k1max:
            k1max = cur[r, 0]
        if cur[r, 1] > k2max:
            k2max = cur[r, 1]
    T11 = binomial_table(p11, nmax)
    T12 = binomial_table(p12, nmax)
    T21 = binomial_table(p21, nmax)
    T22 = binomial_table(p22, nmax)
    B = bivpois_table(lam1, lam2, phi, k1max, k2max)
    pi1 = np.zeros(k1max + 1)
    pi2 = np.zeros(k2max + 1)
    last_a = -1
    last_b = -1
    for r in range(m):
        a = prev[r, 0]
        b = prev[r, 1]
        n1 = cur[r, 0]
        n2 = cur[r, 1]
        if a != last_a or b != last_b:
            # rows sharing a previous state reuse the thinning pmfs
            _thinned_pmf(T11, T12, a, b, min(k1max, a + b), pi1)
            _thinned_pmf(T21, T22, a, b, min(k2max, a + b), pi2)
            last_a = a
            last_b = b
        top1 = n1 if n1 < a + b else a + b
        top2 = n2 if n2 < a + b else a + b
        total = 0.0
        for k1 in range(n1 - top1, n1 + 1):
            s = 0.0
            for k2 in range(n2 - top2, n2 + 1):
                s += pi2[n2 - k2] * B[k1, k2]
            total += pi1[n1 - k1] * s
        out[r] = math.log(total) if total > 0.0 else -np.inf
    return out


@njit(cache=True)
def weighted_loglik(prev, cur, weights, p11, p12, p21, p22, lam1, lam2, phi):
    lp = transition_logprobs(prev, cur, p11, p12, p21, p22, lam1, lam2, phi)
    s = 0.0
    for r in range(lp.shape[0]):
        s += weights[r] * lp[r]
    return s
