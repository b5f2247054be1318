"""
Reproducible study harness.

* :func:`run_estimator_study` simulates replications at several sample
  sizes, fits the full BINAR(1) model to each and tabulates estimate means
  and standard deviations (layout of the usual "mean parameter values" and
  "standard deviation of parameter values" tables).
* :func:`run_model_ladder` fits the five nested rungs to one series and
  runs the four likelihood-ratio tests between consecutive rungs.

Replication ``r`` at size ``n`` always draws from substream ``(n, r)`` of
the study seed, so results do not depend on worker count or on which other
sizes are requested.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from minar.errors import DomainError, EstimationError
from minar.inference import (
    DEPENDENT_POISSON,
    DIAGONAL_BINAR,
    FULL_BINAR,
    INDEPENDENT_INAR,
    INDEPENDENT_POISSON,
    PARAM_NAMES,
    FitOptions,
    FitResult,
    LRTResult,
    fit_cmle,
    lrt,
)
from minar.innovations import BivPoissonParams
from minar.moments import stationary_mean
from minar.process import RandomSource, ThinningMatrix, simulate_minar

logger = logging.getLogger(__name__)

__all__ = [
    "SET_1",
    "SET_2",
    "OKHOTSK_WEST_PACIFIC",
    "PRESETS",
    "StudySpec",
    "StudyResult",
    "run_estimator_study",
    "simulate_replication",
    "LadderReport",
    "run_model_ladder",
    "ladder_summary",
    "CRITICAL_VALUES",
]

DEFAULT_REPLICATIONS = 100
BURN_IN = 100
CRITICAL_VALUES = {1: 3.84, 2: 5.99}


@dataclass(frozen=True)
class StudySpec:
    """Truth, sample sizes, replication count and seed of an estimator study."""

    P: ThinningMatrix
    innov: BivPoissonParams
    sizes: tuple
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    burn_in: int = BURN_IN

    def __post_init__(self):
        object.__setattr__(self, "P", ThinningMatrix.coerce(self.P))
        sizes = tuple(int(n) for n in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if self.replications < 2:
            raise DomainError("replications must be >= 2")
        if not sizes or sizes[0] < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise DomainError("sizes must be positive and strictly increasing")
        if self.P.d != 2:
            raise DomainError("the estimator study is bivariate")

    @property
    def truth(self) -> np.ndarray:
        p = self.P.entries
        return np.array([p[0, 0], p[0, 1], p[1, 0], p[1, 1],
                         self.innov.lambda1, self.innov.lambda2, self.innov.phi])

    def to_dict(self) -> dict:
        return {
            "P": self.P.entries.tolist(),
            "lambda1": self.innov.lambda1,
            "lambda2": self.innov.lambda2,
            "phi": self.innov.phi,
            "sizes": list(self.sizes),
            "replications": self.replications,
            "seed": self.seed,
            "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudySpec":
        return cls(
            ThinningMatrix(np.asarray(d["P"], dtype=float)),
            BivPoissonParams(d["lambda1"], d["lambda2"], d.get("phi", 0.0)),
            tuple(d["sizes"]),
            int(d.get("replications", DEFAULT_REPLICATIONS)),
            int(d.get("seed", 0)),
            int(d.get("burn_in", BURN_IN)),
        )


SET_1 = dict(P=ThinningMatrix.bivariate(0.25, 0.05, 0.10, 0.40), innov=BivPoissonParams(5.0, 3.0, 1.0))
SET_2 = dict(P=ThinningMatrix.bivariate(0.25, 0.0, 0.0, 0.40), innov=BivPoissonParams(5.0, 3.0, 1.0))

# Okhotsk (#1) vs West Pacific (#2) estimates at 3, 12, 24 and 48 hours
OKHOTSK_WEST_PACIFIC = {
    3: dict(P=ThinningMatrix.bivariate(0.0612, 0.0185, 0.0584, 0.1071), innov=BivPoissonParams(0.0214, 0.0576, 0.0012)),
    12: dict(P=ThinningMatrix.bivariate(0.0718, 0.0285, 0.0756, 0.1352), innov=BivPoissonParams(0.0818, 0.2212, 0.0098)),
    24: dict(P=ThinningMatrix.bivariate(0.0817, 0.0280, 0.1060, 0.1552), innov=BivPoissonParams(0.1620, 0.4261, 0.0269)),
    48: dict(P=ThinningMatrix.bivariate(0.1013, 0.0313, 0.0974, 0.1567), innov=BivPoissonParams(0.3132, 0.8539, 0.0739)),
}

PRESETS = {
    "set1": SET_1,
    "set2": SET_2,
    **{f"okhotsk-west-pacific-{h}h": v for h, v in OKHOTSK_WEST_PACIFIC.items()},
}


def simulate_replication(spec: StudySpec, n: int, r: int):
    """Series of ``n`` observations for replication ``r``, started at the rounded
    stationary mean and run through ``burn_in`` discarded steps."""
    src = RandomSource(spec.seed).substream(n).substream(r)
    n0 = np.rint(stationary_mean(spec.P, spec.innov.mean)).astype(np.int64)
    s = simulate_minar(spec.P, spec.innov, n0, spec.burn_in + n - 1, src)
    return s.counts[spec.burn_in:]


def _one_replication(args):
    spec, n, r, options = args
    counts = simulate_replication(spec, n, r)
    try:
        fit = fit_cmle(counts, FULL_BINAR, options, start=_truth_dict(spec))
    except EstimationError as exc:
        return n, r, None, False, str(exc)
    return n, r, fit.theta, fit.converged, ""


def _truth_dict(spec: StudySpec) -> dict:
    return dict(zip(PARAM_NAMES, spec.truth))


@dataclass
class StudyResult:
    spec: StudySpec
    estimates: np.ndarray  # (sizes, replications, 7); nan rows for excluded fits
    included: np.ndarray  # (sizes, replications) bool
    notes: dict = field(default_factory=dict)  # (n, r) -> reason for exclusion

    @property
    def excluded(self) -> np.ndarray:
        return (~self.included).sum(axis=1)

    @property
    def means(self) -> np.ndarray:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all replications excluded gives nan
            return np.nanmean(self.estimates, axis=1)

    @property
    def stdevs(self) -> np.ndarray:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return np.nanstd(self.estimates, axis=1, ddof=1)

    @property
    def mean_std_errors(self) -> np.ndarray:
        """Standard error of each replication mean."""
        k = self.included.sum(axis=1)[:, None]
        return self.stdevs / np.sqrt(k)

    def row(self, n: int) -> int:
        return self.spec.sizes.index(int(n))

    def _table(self, values: np.ndarray) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n"] + list(PARAM_NAMES) + ["excluded"])
        for i, n in enumerate(self.spec.sizes):
            w.writerow([n] + [repr(float(v)) for v in values[i]] + [int(self.excluded[i])])
        return buf.getvalue()

    def means_csv(self) -> str:
        return self._table(self.means)

    def stdevs_csv(self) -> str:
        return self._table(self.stdevs)

    def estimates_csv(self) -> str:
        """Raw per-replication estimates, one row per (size, replication)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "replication"] + list(PARAM_NAMES) + ["included"])
        for i, n in enumerate(self.spec.sizes):
            for r in range(self.spec.replications):
                w.writerow([n, r] + [repr(float(v)) for v in self.estimates[i, r]] + [int(self.included[i, r])])
        return buf.getvalue()

    def format(self) -> str:
        """Both tables, probabilities in percent and rates to 4 decimals."""
        out = []
        for title, vals in (("mean", self.means), ("stdev", self.stdevs)):
            out.append(f"{title:>8} " + "".join(f"{h:>10}" for h in PARAM_NAMES) + "  excl")
            for i, n in enumerate(self.spec.sizes):
                cells = [f"{100 * v:9.2f}%" for v in vals[i, :4]] + [f"{v:10.4f}" for v in vals[i, 4:]]
                out.append(f"{n:>8} " + "".join(cells) + f"  {int(self.excluded[i]):>4}")
            out.append("")
        return "\n".join(out)


def run_estimator_study(spec: StudySpec, options: Optional[FitOptions] = None, workers: int = 1) -> StudyResult:
    """Simulate and fit every (size, replication) cell of the study.

    Fits that fail or do not converge are excluded from the tables and
    counted in the ``excluded`` column. The length guard of the fitter is
    lowered to the smallest study size so short series can be studied.
    """
    opts = options or FitOptions(std_errors=False)
    opts = replace(opts, min_length=min(opts.min_length, spec.sizes[0]))
    tasks = [(spec, n, r, opts) for n in spec.sizes for r in range(spec.replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_one_replication, tasks, chunksize=4))
    else:
        results = [_one_replication(t) for t in tasks]
    S, R = len(spec.sizes), spec.replications
    est = np.full((S, R, len(PARAM_NAMES)), np.nan)
    inc = np.zeros((S, R), dtype=bool)
    notes = {}
    for n, r, theta, ok, reason in results:
        i = spec.sizes.index(n)
        if theta is not None and ok:
            est[i, r] = theta
            inc[i, r] = True
        else:
            notes[(n, r)] = reason or "not converged"
    if notes:
        logger.info("%d of %d fits excluded", len(notes), S * R)
    return StudyResult(spec, est, inc, notes)


# --------------------------------------------------------------------------
# model ladder

LADDER_TESTS = (
    (INDEPENDENT_POISSON, DEPENDENT_POISSON),
    (INDEPENDENT_POISSON, INDEPENDENT_INAR),
    (INDEPENDENT_INAR, DIAGONAL_BINAR),
    (DIAGONAL_BINAR, FULL_BINAR),
)


@dataclass
class LadderReport:
    fits: dict  # rung name -> FitResult
    tests: list  # LRTResult in LADDER_TESTS order

    @property
    def significant(self) -> list:
        return [t.statistic > CRITICAL_VALUES[t.df] for t in self.tests]

    @property
    def converged(self) -> bool:
        return all(f.converged for f in self.fits.values())

    def to_dict(self) -> dict:
        return {
            "loglik": {k: f.loglik for k, f in self.fits.items()},
            "fits": {k: f.to_dict() for k, f in self.fits.items()},
            "tests": [dict(t.to_dict(), critical=CRITICAL_VALUES[t.df], significant=s)
                      for t, s in zip(self.tests, self.significant)],
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["nested", "full", "statistic", "df", "critical", "significant", "p_value"])
        for t, s in zip(self.tests, self.significant):
            w.writerow([t.nested, t.full, repr(t.statistic), t.df, CRITICAL_VALUES[t.df], int(s), repr(t.p_value)])
        return buf.getvalue()


def run_model_ladder(series, options: Optional[FitOptions] = None) -> LadderReport:
    """Fit the five rungs and test each against the next along the nesting chain.

    Each richer rung is also started from the optimum of the rungs it
    contains, so log-likelihoods are weakly increasing along every chain.
    """
    ip = fit_cmle(series, INDEPENDENT_POISSON, options)
    dp = fit_cmle(series, DEPENDENT_POISSON, options, extra_starts=[ip])
    ii = fit_cmle(series, INDEPENDENT_INAR, options, extra_starts=[ip])
    dg = fit_cmle(series, DIAGONAL_BINAR, options, extra_starts=[ii, dp])
    fb = fit_cmle(series, FULL_BINAR, options, extra_starts=[dg])
    fits = {f.model.name: f for f in (ip, dp, ii, dg, fb)}
    tests = [lrt(fits[a.name], fits[b.name]) for a, b in LADDER_TESTS]
    return LadderReport(fits, tests)


def ladder_summary(columns: dict, quantiles: Sequence[float] = (0.5, 0.75, 0.9, 0.95, 0.975)) -> str:
    """Distribution of LRT statistics across many series, one block per test.

    ``columns`` maps a column label (e.g. a sampling frequency) to a list of
    :class:`LadderReport`. Rows are mean, stdev, the requested quantiles and
    the share of statistics above the critical value.
    """
    labels = list(columns)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for k, (a, b) in enumerate(LADDER_TESTS):
        w.writerow([f"{b.name} over {a.name}"] + labels)
        stats = {lab: np.array([rep.tests[k].statistic for rep in columns[lab]]) for lab in labels}
        df = columns[labels[0]][0].tests[k].df if labels and columns[labels[0]] else 1
        w.writerow(["mean"] + [repr(float(stats[lab].mean())) for lab in labels])
        w.writerow(["stdev"] + [repr(float(stats[lab].std(ddof=1))) if stats[lab].size > 1 else "nan" for lab in labels])
        for q in quantiles:
            w.writerow([f"{100 * q:g}%"] + [repr(float(np.quantile(stats[lab], q))) for lab in labels])
        crit = CRITICAL_VALUES[df]
        w.writerow([f"% > {crit}"] + [repr(float(np.mean(stats[lab] > crit))) for lab in labels])
    return buf.getvalue()
