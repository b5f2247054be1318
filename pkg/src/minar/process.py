"""
Thinning operators and MINAR(1) simulation.

A d-variate INAR(1) process evolves as ``N_t = P o N_{t-1} + eps_t`` where
``P o N`` is the matrix binomial thinning: component ``i`` of ``P o N`` is
``sum_j Binomial(N_j, p_ij)`` with every binomial draw independent.

Random numbers always come from a :class:`RandomSource` (or a numpy
``Generator`` derived from one), so every simulation is reproducible.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional, Sequence, Union

import numpy as np

from minar import _kernels
from minar.errors import DimensionError, DomainError

__all__ = [
    "RandomSource",
    "ThinningMatrix",
    "CountSeries",
    "as_generator",
    "binomial_thin",
    "matrix_thin",
    "simulate_minar",
    "simulate_paths",
    "simulate_inma",
    "spectral_radius",
    "is_stationary",
]


@dataclass(frozen=True)
class RandomSource:
    """Seed plus stream id; identical pairs reproduce identical draws.

    Distinct stream ids are mapped to distinct ``SeedSequence`` spawn keys,
    which numpy guarantees to give independent PCG64 streams.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, stream: int) -> "RandomSource":
        # nested ids keep (seed, stream, sub) distinct from (seed, sub)
        return RandomSource(self.seed, _mix_stream(self.stream, stream))


def _mix_stream(a: int, b: int) -> int:
    return int(np.random.SeedSequence([a, b]).generate_state(1, np.uint64)[0] >> 1)


RngLike = Union[RandomSource, np.random.Generator, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Coerce a RandomSource, Generator or integer seed to a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RandomSource):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


@dataclass(frozen=True)
class ThinningMatrix:
    """Square matrix of survival probabilities ``p_ij`` in [0, 1]."""

    entries: np.ndarray

    def __post_init__(self):
        P = np.array(self.entries, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
            raise DimensionError(f"thinning matrix must be square, got shape {P.shape}")
        if not np.all(np.isfinite(P)) or np.any(P < 0.0) or np.any(P > 1.0):
            raise DomainError("thinning probabilities must lie in [0, 1]")
        P.setflags(write=False)
        object.__setattr__(self, "entries", P)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def variance_matrix(self) -> np.ndarray:
        """Entrywise ``p_ij (1 - p_ij)``; ``diag(V @ N)`` is the thinning covariance."""
        return self.entries * (1.0 - self.entries)

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all(self.entries[~np.eye(self.d, dtype=bool)] == 0.0))

    @classmethod
    def coerce(cls, P) -> "ThinningMatrix":
        return P if isinstance(P, cls) else cls(np.asarray(P, dtype=float))

    @classmethod
    def bivariate(cls, p11, p12, p21, p22) -> "ThinningMatrix":
        return cls(np.array([[p11, p12], [p21, p22]], dtype=float))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass
class CountSeries:
    """An ``(n_steps, d)`` array of nonnegative integer counts.

    Row 0 is the conditioning observation ``N_0``. Optional timestamps are
    timezone-aware UTC instants in strictly increasing order.
    """

    counts: np.ndarray
    timestamps: Optional[list] = None
    names: Optional[list] = field(default=None)

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2:
            raise DimensionError("counts must be a 2-d array (n_steps, d)")
        if c.size and (not np.all(np.isfinite(c)) or np.any(c != np.round(c))):
            raise DomainError("counts must be integral")
        if np.any(c < 0):
            raise DomainError("counts must be nonnegative")
        self.counts = c.astype(np.int64)
        if self.timestamps is not None:
            ts = [_as_utc(t) for t in self.timestamps]
            if len(ts) != c.shape[0]:
                raise DimensionError("one timestamp per row is required")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise DomainError("timestamps must be strictly increasing")
            self.timestamps = ts
        if self.names is not None and len(self.names) != c.shape[1]:
            raise DimensionError("one name per column is required")

    @property
    def n_steps(self) -> int:
        return self.counts.shape[0]

    @property
    def d(self) -> int:
        return self.counts.shape[1]

    def __len__(self) -> int:
        return self.n_steps

    def __getitem__(self, item) -> "CountSeries":
        if not isinstance(item, slice):
            raise TypeError("CountSeries supports slice indexing only")
        ts = self.timestamps[item] if self.timestamps is not None else None
        return CountSeries(self.counts[item], ts, self.names)

    def column_names(self) -> list:
        return list(self.names) if self.names else [f"series_{i + 1}" for i in range(self.d)]

    def to_csv(self, path=None) -> str:
        """Serialize as ``t,series_1,...,series_d``; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"series_{i + 1}" for i in range(self.d)])
        for k, row in enumerate(self.counts):
            t = _format_utc(self.timestamps[k]) if self.timestamps is not None else k
            w.writerow([t] + [int(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "CountSeries":
        """Read the CSV layout written by :meth:`to_csv` (path or file object)."""
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, newline="") as fh:
                text = fh.read()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or not rows[0] or rows[0][0] != "t":
            raise DomainError("count series CSV must start with a 't' header column")
        body = [r for r in rows[1:] if r]
        d = len(rows[0]) - 1
        counts = np.array([[int(v) for v in r[1:]] for r in body], dtype=np.int64).reshape(len(body), d)
        stamps = None
        if body and not _is_int(body[0][0]):
            stamps = [_parse_utc(r[0]) for r in body]
        return cls(counts, stamps)


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


def _as_utc(t) -> datetime:
    if isinstance(t, str):
        return _parse_utc(t)
    if t.tzinfo is None:
        return t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def _parse_utc(s: str) -> datetime:
    s = s.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    return _as_utc(datetime.fromisoformat(s))


def _format_utc(t: datetime) -> str:
    return t.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _check_prob(p) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return p


def binomial_thin(p: float, n: int, rng: RngLike) -> int:
    """Draw ``p o n``, i.e. a Binomial(n, p) count.

    ``p`` equal to 0 or 1 and ``n == 0`` are resolved without touching the
    generator, so streams stay aligned across constrained model variants.
    """
    p = _check_prob(p)
    if n < 0 or int(n) != n:
        raise DomainError(f"count must be a nonnegative integer, got {n}")
    n = int(n)
    if n == 0 or p == 0.0:
        return 0
    if p == 1.0:
        return n
    return int(as_generator(rng).binomial(n, p))


def matrix_thin(P, N: Sequence[int], rng: RngLike) -> np.ndarray:
    """Matrix thinning ``P o N`` with independent binomials for every (i, j)."""
    P = ThinningMatrix.coerce(P)
    N = np.asarray(N)
    if N.shape != (P.d,):
        raise DimensionError(f"count vector of length {P.d} expected, got shape {N.shape}")
    if np.any(N < 0):
        raise DomainError("counts must be nonnegative")
    g = as_generator(rng)
    out = np.zeros(P.d, dtype=np.int64)
    for i in range(P.d):
        for j in range(P.d):
            out[i] += binomial_thin(P.entries[i, j], int(N[j]), g)
    return out


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _resolve_sampler(innovation) -> Sampler:
    # BivPoissonParams and friends expose .sample(rng, size)
    if hasattr(innovation, "sample"):
        return innovation.sample
    if callable(innovation):
        return innovation
    raise TypeError("innovation must be a sampler callable or expose .sample(rng, size)")


def simulate_minar(P, innovation, N0: Sequence[int], steps: int, rng: RngLike) -> CountSeries:
    """Simulate ``steps`` transitions of ``N_t = P o N_{t-1} + eps_t``.

    Parameters
    ----------
    P : ThinningMatrix or array_like
        Thinning matrix. Nonstationary matrices are allowed here.
    innovation : callable or object with ``sample``
        ``sampler(generator, size) -> (size, d)`` integer array.
    N0 : sequence of int
        Initial counts; becomes row 0 of the result.
    steps : int
        Number of transitions.
    rng : RandomSource, Generator or int

    Returns
    -------
    CountSeries with ``steps + 1`` rows.
    """
    P = ThinningMatrix.coerce(P)
    N0 = np.asarray(N0, dtype=np.int64)
    if N0.shape != (P.d,):
        raise DimensionError(f"initial counts of length {P.d} expected, got shape {N0.shape}")
    if np.any(N0 < 0):
        raise DomainError("initial counts must be nonnegative")
    if steps < 0:
        raise DomainError("steps must be nonnegative")
    g = as_generator(rng)
    if steps == 0:
        return CountSeries(N0[None, :].copy())
    eps = np.asarray(_resolve_sampler(innovation)(g, steps), dtype=np.int64).reshape(steps, -1)
    if eps.shape[1] != P.d:
        raise DimensionError(f"innovation dimension {eps.shape[1]} does not match P ({P.d})")
    out = _kernels.minar_recursion(np.ascontiguousarray(P.entries), N0, eps, g)
    return CountSeries(out)


def simulate_paths(P, innovation, N0: Sequence[int], steps: int, n_paths: int, rng: RngLike) -> np.ndarray:
    """Simulate many independent paths at once.

    Returns an ``(n_paths, steps + 1, d)`` array; slice ``[:, 0]`` is ``N0``.
    Vectorized over paths, so it suits short horizons with many replications.
    """
    P = ThinningMatrix.coerce(P)
    N0 = np.asarray(N0, dtype=np.int64)
    if N0.shape != (P.d,):
        raise DimensionError(f"initial counts of length {P.d} expected")
    g = as_generator(rng)
    sampler = _resolve_sampler(innovation)
    out = np.empty((n_paths, steps + 1, P.d), dtype=np.int64)
    out[:, 0] = N0
    cur = np.broadcast_to(N0, (n_paths, P.d)).copy()
    for t in range(1, steps + 1):
        nxt = np.asarray(sampler(g, n_paths), dtype=np.int64).reshape(n_paths, P.d)
        for i in range(P.d):
            for j in range(P.d):
                p = P.entries[i, j]
                if p == 1.0:
                    nxt[:, i] += cur[:, j]
                elif p > 0.0:
                    nxt[:, i] += g.binomial(cur[:, j], p)
        cur = nxt
        out[:, t] = cur
    return out


def simulate_inma(P, innovation, steps: int, rng: RngLike, tol: float = 1e-8) -> CountSeries:
    """Simulate through the moving-average form ``sum_h P^h o eps_{t-h}``.

    Each innovation cohort is thinned once per period it survives and
    dropped after ``H`` periods, ``H`` being the first power with
    ``||P^H||_inf < tol``. The series starts in (truncated) stationarity, so
    no burn-in is required. Used as an independent check of the recursion.
    """
    P = ThinningMatrix.coerce(P)
    H = _truncation_order(P.entries, tol)
    g = as_generator(rng)
    sampler = _resolve_sampler(innovation)
    d = P.d
    total = steps + 1 + H
    eps = np.asarray(sampler(g, total), dtype=np.int64).reshape(total, d)
    # cohorts[a] holds the survivors of the innovation born a periods ago
    cohorts = np.zeros((H + 1, d), dtype=np.int64)
    out = np.empty((steps + 1, d), dtype=np.int64)
    for s in range(total):
        thinned = np.zeros_like(cohorts)
        for i in range(d):
            for j in range(d):
                p = P.entries[i, j]
                if p == 1.0:
                    thinned[:, i] += cohorts[:, j]
                elif p > 0.0:
                    thinned[:, i] += g.binomial(cohorts[:, j], p)
        cohorts[1:] = thinned[:-1]
        cohorts[0] = eps[s]
        if s >= H:
            out[s - H] = cohorts.sum(axis=0)
    return CountSeries(out)


def _truncation_order(P: np.ndarray, tol: float, max_order: int = 10_000) -> int:
    M = np.eye(P.shape[0])
    for h in range(max_order + 1):
        if np.abs(M).sum(axis=1).max() < tol:
            return h
        M = M @ P
    raise DomainError("P^h does not vanish; the moving-average form needs a stationary P")


def spectral_radius(P, tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest eigenvalue modulus of ``P``.

    ``d == 2`` uses the closed-form quadratic. Larger matrices use power
    iteration on the nonnegative matrix (the Perron root), falling back to
    a dense eigenvalue solve when the iteration stalls.
    """
    P = np.asarray(ThinningMatrix.coerce(P).entries)
    d = P.shape[0]
    if d == 1:
        return float(abs(P[0, 0]))
    if d == 2:
        tr = P[0, 0] + P[1, 1]
        det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
        disc = tr * tr - 4.0 * det
        if disc >= 0.0:
            r = math.sqrt(disc)
            return float(max(abs(tr + r), abs(tr - r)) / 2.0)
        return float(math.sqrt(det))  # complex pair: |z|^2 = det
    x = np.ones(d) / d
    est = 0.0
    for _ in range(max_iter):
        y = P @ x
        s = y.sum()
        if s == 0.0:
            return 0.0
        y /= s
        if np.max(np.abs(y - x)) < tol and abs(s - est) < tol:
            return float(s)
        x, est = y, s
    return float(np.max(np.abs(np.linalg.eigvals(P))))


def is_stationary(P) -> bool:
    return spectral_radius(P) < 1.0
