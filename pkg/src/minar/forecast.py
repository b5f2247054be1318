"""
h-step forecasts and Monte Carlo tail tables.

The conditional mean is ``P^h N + (I + P + ... + P^{h-1}) lam``. The
conditional covariance follows the recursion::

    V_1(N) = diag(V N) + Lam
    V_h(N) = E[V_{h-1}(P o N + eps) | N] + P^{h-1} V_1(N) P^{h-1}'

Every term is affine in ``N``, so the expectation closes in matrix form and
unrolls to ``V_h(N) = sum_j P^j [diag(V m_{h-1-j}(N)) + Lam] P^j'`` with
``m_k(N)`` the k-step conditional mean.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from minar.errors import DomainError
from minar.innovations import BivPoissonParams
from minar.process import RandomSource, ThinningMatrix, as_generator

__all__ = [
    "ForecastResult",
    "TailTable",
    "forecast_mean",
    "forecast_var",
    "forecast",
    "mc_tail_table",
    "DEFAULT_PATHS",
]

DEFAULT_PATHS = 100_000
BLOCK_PATHS = 10_000


def _innov_moments(innov):
    if isinstance(innov, BivPoissonParams):
        return innov.mean, innov.cov
    lam, Lam = innov
    return np.asarray(lam, dtype=float), np.asarray(Lam, dtype=float)


def forecast_mean(P, lam, N_t, h: int) -> np.ndarray:
    """``E(N_{t+h} | N_t)``; ``h = 0`` returns ``N_t``."""
    if h < 0:
        raise DomainError("horizon must be nonnegative")
    P = ThinningMatrix.coerce(P).entries
    m = np.asarray(N_t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    for _ in range(h):
        m = P @ m + lam
    return m


def forecast_var(P, innov, N_t, h: int) -> np.ndarray:
    """``var(N_{t+h} | N_t)``; ``h = 0`` gives the zero matrix.

    ``innov`` is a :class:`BivPoissonParams` or a ``(mean, covariance)`` pair.
    """
    if h < 0:
        raise DomainError("horizon must be nonnegative")
    P = ThinningMatrix.coerce(P)
    lam, Lam = _innov_moments(innov)
    M = P.entries
    V = P.variance_matrix
    N_t = np.asarray(N_t, dtype=float)
    out = np.zeros((P.d, P.d))
    Pj = np.eye(P.d)
    for j in range(h):
        m = forecast_mean(M, lam, N_t, h - 1 - j)
        out += Pj @ (np.diag(V @ m) + Lam) @ Pj.T
        Pj = M @ Pj
    return 0.5 * (out + out.T)


@dataclass
class ForecastResult:
    horizon: int
    mean: np.ndarray
    cov: np.ndarray
    method: str = "analytic"


def forecast(P, innov, N_t, horizons: Sequence[int]) -> list:
    lam, _ = _innov_moments(innov)
    return [ForecastResult(h, forecast_mean(P, lam, N_t, h), forecast_var(P, innov, N_t, h)) for h in horizons]


@dataclass
class TailTable:
    """Estimates of ``P(sum_{k<=T} (N1_k + N2_k) >= n | N_0)``.

    ``probabilities[i, j]`` is for ``thresholds[i]`` and ``horizons[j]``.
    """

    thresholds: np.ndarray
    horizons: np.ndarray
    probabilities: np.ndarray
    std_errors: np.ndarray
    paths: int
    seed: int

    def to_csv(self, path=None, std_errors: bool = False) -> str:
        values = self.std_errors if std_errors else self.probabilities
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n / days"] + [str(int(h)) for h in self.horizons])
        for n, row in zip(self.thresholds, values):
            w.writerow([int(n)] + [repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def format(self, digits: int = 4) -> str:
        head = "n / days " + "".join(f"{int(h):>10d}" for h in self.horizons)
        rows = [f"{int(n):>8d} " + "".join(f"{v:>10.{digits}f}" for v in r)
                for n, r in zip(self.thresholds, self.probabilities)]
        return "\n".join([head] + rows)


def mc_tail_table(
    P,
    innov: BivPoissonParams,
    N0: Sequence[int],
    horizons: Sequence[int],
    thresholds: Sequence[int],
    paths: int = DEFAULT_PATHS,
    rng=0,
) -> TailTable:
    """Monte Carlo exceedance probabilities of cumulated total counts.

    Paths are simulated in fixed blocks of 10 000, block ``b`` drawing from
    substream ``b`` of the random source, so the table depends only on the
    seed and ``paths``. Binomial standard errors are reported per cell.
    """
    if paths < 1:
        raise DomainError("paths must be >= 1")
    P = ThinningMatrix.coerce(P)
    horizons = np.asarray(sorted(set(int(h) for h in horizons)))
    if horizons.size == 0 or horizons[0] < 1:
        raise DomainError("horizons must be positive")
    thresholds = np.asarray(thresholds, dtype=np.int64)
    src = rng if isinstance(rng, RandomSource) else RandomSource(int(rng))
    M = P.entries
    T = int(horizons[-1])
    hits = np.zeros((thresholds.size, horizons.size), dtype=np.int64)
    n0 = np.asarray(N0, dtype=np.int64)
    if n0.shape != (P.d,):
        raise DomainError(f"initial counts of length {P.d} expected")
    done = 0
    block = 0
    while done < paths:
        size = min(BLOCK_PATHS, paths - done)
        g = as_generator(src.substream(block))
        cur = np.broadcast_to(n0, (size, P.d)).copy()
        total = np.zeros(size, dtype=np.int64)
        col = 0
        for t in range(1, T + 1):
            nxt = np.asarray(innov.sample(g, size), dtype=np.int64)
            for i in range(P.d):
                for j in range(P.d):
                    p = M[i, j]
                    if p == 1.0:
                        nxt[:, i] += cur[:, j]
                    elif p > 0.0:
                        nxt[:, i] += g.binomial(cur[:, j], p)
            cur = nxt
            total += cur.sum(axis=1)
            if t == horizons[col]:
                hits[:, col] += (total[None, :] >= thresholds[:, None]).sum(axis=1)
                col += 1
        done += size
        block += 1
    prob = hits / paths
    se = np.sqrt(prob * (1.0 - prob) / paths)
    return TailTable(thresholds, horizons, prob, se, paths, src.seed)
