"""
Common-shock bivariate Poisson innovations.

``eps_1 = M_1 + M_0`` and ``eps_2 = M_2 + M_0`` with independent Poisson
``M_1, M_2, M_0`` of means ``lambda1 - phi``, ``lambda2 - phi`` and ``phi``.
Both margins are Poisson and ``cov(eps_1, eps_2) = phi``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from minar.errors import DomainError

__all__ = ["BivPoissonParams", "bp_logpmf", "bp_pmf_table", "bp_sample", "bp_moments"]


@dataclass(frozen=True)
class BivPoissonParams:
    """Innovation triple: marginal means and the common-shock mean ``phi``."""

    lambda1: float
    lambda2: float
    phi: float = 0.0

    def __post_init__(self):
        l1, l2, phi = float(self.lambda1), float(self.lambda2), float(self.phi)
        if not (np.isfinite(l1) and l1 > 0.0):
            raise DomainError(f"lambda1 must be positive, got {self.lambda1}")
        if not (np.isfinite(l2) and l2 > 0.0):
            raise DomainError(f"lambda2 must be positive, got {self.lambda2}")
        if not (np.isfinite(phi) and 0.0 <= phi <= min(l1, l2)):
            raise DomainError(f"phi must lie in [0, min(lambda1, lambda2)], got {self.phi}")
        object.__setattr__(self, "lambda1", l1)
        object.__setattr__(self, "lambda2", l2)
        object.__setattr__(self, "phi", phi)

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2])

    @property
    def cov(self) -> np.ndarray:
        return np.array([[self.lambda1, self.phi], [self.phi, self.lambda2]])

    def sample(self, rng, size=None) -> np.ndarray:
        return bp_sample(self, rng, size)


def bp_logpmf(k1, k2, params: BivPoissonParams):
    """Log of P(eps = (k1, k2)), vectorized over integer ``k1``, ``k2``.

    The inner sum over the number ``i`` of common shocks is accumulated with
    log-sum-exp, so large counts do not overflow::

        log p = -(l1 + l2 - phi) + sum_i [ (k1-i) log(l1-phi) + (k2-i) log(l2-phi)
                 + i log(phi) - log((k1-i)!) - log((k2-i)!) - log(i!) ]
    """
    k1 = np.asarray(k1)
    k2 = np.asarray(k2)
    if np.any(k1 < 0) or np.any(k2 < 0):
        raise DomainError("counts must be nonnegative")
    k1b, k2b = np.broadcast_arrays(k1.astype(np.int64), k2.astype(np.int64))
    a = params.lambda1 - params.phi
    b = params.lambda2 - params.phi
    phi = params.phi
    kmax = int(np.minimum(k1b, k2b).max()) if k1b.size else 0
    i = np.arange(kmax + 1).reshape((-1,) + (1,) * k1b.ndim)
    valid = i <= np.minimum(k1b, k2b)
    r1 = np.where(valid, k1b - i, 0)
    r2 = np.where(valid, k2b - i, 0)
    terms = (
        xlogy(r1, a) - gammaln(r1 + 1)
        + xlogy(r2, b) - gammaln(r2 + 1)
        + xlogy(i, phi) - gammaln(i + 1)
    )
    terms = np.where(valid, terms, -np.inf)
    out = logsumexp(terms, axis=0) - (params.lambda1 + params.lambda2 - phi)
    return out if out.ndim else float(out)


def bp_pmf_table(params: BivPoissonParams, k1max: int, k2max: int) -> np.ndarray:
    """``(k1max+1, k2max+1)`` table of probabilities."""
    k1, k2 = np.meshgrid(np.arange(k1max + 1), np.arange(k2max + 1), indexing="ij")
    return np.exp(bp_logpmf(k1, k2, params))


def bp_sample(params: BivPoissonParams, rng, size=None) -> np.ndarray:
    """Draw innovation pairs; shape ``(2,)`` if ``size`` is None else ``(size, 2)``."""
    from minar.process import as_generator

    g = as_generator(rng)
    n = 1 if size is None else int(size)
    m0 = g.poisson(params.phi, n) if params.phi > 0.0 else np.zeros(n, dtype=np.int64)
    e1 = g.poisson(params.lambda1 - params.phi, n) + m0
    e2 = g.poisson(params.lambda2 - params.phi, n) + m0
    out = np.column_stack([e1, e2]).astype(np.int64)
    return out[0] if size is None else out


def bp_moments(params: BivPoissonParams):
    """Return ``(mean_vector, covariance_matrix)``."""
    return params.mean, params.cov
