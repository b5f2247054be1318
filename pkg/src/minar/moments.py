"""
Stationary moments of a MINAR(1) process.

With innovation mean ``lam`` and covariance ``Lam``::

    mu       = (I - P)^{-1} lam
    gamma(0) = P gamma(0) P' + diag(V mu) + Lam,   V = P * (1 - P)
    gamma(h) = P^h gamma(0)

``gamma(0)`` is found by fixed-point iteration started at the identity,
which converges for any stationary ``P`` (defective ones included).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from minar.errors import ConvergenceError, DomainError, StationarityError
from minar.process import ThinningMatrix, spectral_radius

__all__ = [
    "StationaryMoments",
    "stationary_mean",
    "stationary_cov",
    "autocov",
    "correlation_summary",
    "moments_report",
]

STEP_TOL = 1e-12
MAX_ITER = 10_000


@dataclass
class StationaryMoments:
    mu: np.ndarray
    gamma0: np.ndarray
    converged: bool
    iterations: int
    deltas: np.ndarray  # max-abs change at every fixed-point step

    def residual(self, P, Lambda) -> float:
        P = ThinningMatrix.coerce(P)
        A = np.diag(P.variance_matrix @ self.mu) + np.asarray(Lambda, dtype=float)
        R = self.gamma0 - P.entries @ self.gamma0 @ P.entries.T - A
        return float(np.abs(R).max())


def _require_stationary(P: ThinningMatrix) -> None:
    rho = spectral_radius(P)
    if not rho < 1.0:
        raise StationarityError(f"spectral radius {rho:.6g} >= 1; no stationary moments")


def stationary_mean(P, lam) -> np.ndarray:
    """Solve ``(I - P) mu = lam``."""
    P = ThinningMatrix.coerce(P)
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (P.d,):
        raise DomainError(f"innovation mean must have length {P.d}")
    _require_stationary(P)
    return np.linalg.solve(np.eye(P.d) - P.entries, lam)


def stationary_cov(P, lam, Lambda, tol: float = STEP_TOL, max_iter: int = MAX_ITER) -> StationaryMoments:
    """Iterate ``Z <- P Z P' + diag(V mu) + Lambda`` from ``Z = I``.

    Stops when the entrywise change drops below ``tol``; raises
    :class:`ConvergenceError` after ``max_iter`` steps.
    """
    P = ThinningMatrix.coerce(P)
    Lambda = np.asarray(Lambda, dtype=float)
    if Lambda.shape != (P.d, P.d):
        raise DomainError(f"innovation covariance must be {P.d}x{P.d}")
    if not np.allclose(Lambda, Lambda.T, rtol=0, atol=1e-12):
        raise DomainError("innovation covariance must be symmetric")
    if np.linalg.eigvalsh(Lambda).min() < -1e-12:
        raise DomainError("innovation covariance must be positive semidefinite")
    mu = stationary_mean(P, lam)
    A = np.diag(P.variance_matrix @ mu) + Lambda
    M = P.entries
    Z = np.eye(P.d)
    deltas = []
    for it in range(1, max_iter + 1):
        Z_new = M @ Z @ M.T + A
        delta = float(np.abs(Z_new - Z).max())
        deltas.append(delta)
        Z = Z_new
        if delta < tol:
            Z = 0.5 * (Z + Z.T)
            return StationaryMoments(mu, Z, True, it, np.array(deltas))
    raise ConvergenceError(f"gamma(0) fixed point not reached in {max_iter} iterations")


def autocov(gamma0, P, h: int) -> np.ndarray:
    """``gamma(h) = P^h gamma(0) = cov(N_t, N_{t-h})`` for ``h >= 0``."""
    if h < 0:
        raise DomainError("lag must be nonnegative")
    P = ThinningMatrix.coerce(P)
    return np.linalg.matrix_power(P.entries, h) @ np.asarray(gamma0, dtype=float)


def correlation_summary(P, lam, Lambda) -> dict:
    """Contemporaneous, lag-1 auto- and lag-1 cross-correlations of a BINAR(1)."""
    mom = stationary_cov(P, lam, Lambda)
    g0 = mom.gamma0
    g1 = autocov(g0, P, 1)
    sd = np.sqrt(np.diag(g0))
    return {
        "cor(N1_t,N2_t)": g0[0, 1] / (sd[0] * sd[1]),
        "cor(N1_t,N1_t-1)": g1[0, 0] / g0[0, 0],
        "cor(N2_t,N2_t-1)": g1[1, 1] / g0[1, 1],
        "cor(N1_t,N2_t-1)": g1[0, 1] / (sd[0] * sd[1]),
    }


def moments_report(P, lam, Lambda) -> dict:
    """Means, variances and correlations keyed like the usual summary table."""
    mom = stationary_cov(P, lam, Lambda)
    rep = {
        "E(N1_t)": float(mom.mu[0]),
        "E(N2_t)": float(mom.mu[1]),
        "var(N1_t)": float(mom.gamma0[0, 0]),
        "var(N2_t)": float(mom.gamma0[1, 1]),
    }
    rep.update({k: float(v) for k, v in correlation_summary(P, lam, Lambda).items()})
    return rep


def moments_report_json(P, lam, Lambda) -> str:
    return json.dumps(moments_report(P, lam, Lambda), indent=2)
