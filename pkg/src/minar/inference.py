"""
Conditional maximum likelihood for BINAR(1) with bivariate Poisson noise.

The transition probability from ``N_{t-1} = (a, b)`` to ``N_t = (n1, n2)`` is::

    sum_{k1, k2} pi_1(n1 - k1) pi_2(n2 - k2) P(eps = (k1, k2))

where ``pi_1`` is the convolution of Binomial(a, p11) and Binomial(b, p12)
(and likewise ``pi_2`` with p21, p22). The log-likelihood conditions on
the first row of the series.

Models are described by the set of free parameters; everything else is
pinned at zero. The five nested rungs used for model comparison and the
constraint shapes used in the Granger tests are predefined.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize, stats
from scipy.special import expit, logit, logsumexp

from minar import _kernels
from minar.errors import DomainError, EstimationError
from minar.innovations import BivPoissonParams, bp_logpmf
from minar.process import CountSeries, ThinningMatrix

logger = logging.getLogger(__name__)

__all__ = [
    "PARAM_NAMES",
    "ModelSpec",
    "INDEPENDENT_POISSON",
    "DEPENDENT_POISSON",
    "INDEPENDENT_INAR",
    "DIAGONAL_BINAR",
    "FULL_BINAR",
    "NO_2_TO_1",
    "NO_1_TO_2",
    "FULL_NO_PHI",
    "LADDER",
    "FitOptions",
    "FitResult",
    "LRTResult",
    "CausalityReport",
    "thinning_transition_logpmf",
    "transition_logprob",
    "conditional_loglik",
    "to_unconstrained",
    "to_natural",
    "fit_cmle",
    "lrt",
    "granger_tests",
    "get_model",
]

PARAM_NAMES = ("p11", "p12", "p21", "p22", "lambda1", "lambda2", "phi")
PROB_NAMES = PARAM_NAMES[:4]
# box on the unconstrained scale: a boundary optimum stops the simplex at
# logit = -Z_MAX (p ~ 2e-9) instead of drifting toward -inf
Z_MAX = 20.0
PHI_SLACK = 1e-12
BOUNDARY_TOL = 1e-6
MIN_LENGTH = 30


@dataclass(frozen=True)
class ModelSpec:
    """A model identified by its free parameters; the rest are fixed at 0."""

    name: str
    free: tuple

    def __post_init__(self):
        bad = set(self.free) - set(PARAM_NAMES)
        if bad:
            raise DomainError(f"unknown parameters {sorted(bad)}")
        if not {"lambda1", "lambda2"} <= set(self.free):
            raise DomainError("innovation means are always free")
        object.__setattr__(self, "free", tuple(p for p in PARAM_NAMES if p in self.free))

    @property
    def n_params(self) -> int:
        return len(self.free)

    def nested_in(self, other: "ModelSpec") -> bool:
        return set(self.free) <= set(other.free)


INDEPENDENT_POISSON = ModelSpec("independent-poisson", ("lambda1", "lambda2"))
DEPENDENT_POISSON = ModelSpec("dependent-poisson", ("lambda1", "lambda2", "phi"))
INDEPENDENT_INAR = ModelSpec("independent-inar", ("p11", "p22", "lambda1", "lambda2"))
DIAGONAL_BINAR = ModelSpec("diagonal-binar", ("p11", "p22", "lambda1", "lambda2", "phi"))
FULL_BINAR = ModelSpec("full-binar", PARAM_NAMES)
# Granger shapes: p12 carries series 2 into series 1, p21 carries 1 into 2
NO_2_TO_1 = ModelSpec("no-2-to-1", ("p11", "p21", "p22", "lambda1", "lambda2", "phi"))
NO_1_TO_2 = ModelSpec("no-1-to-2", ("p11", "p12", "p22", "lambda1", "lambda2", "phi"))
FULL_NO_PHI = ModelSpec("full-no-phi", ("p11", "p12", "p21", "p22", "lambda1", "lambda2"))

LADDER = (INDEPENDENT_POISSON, DEPENDENT_POISSON, INDEPENDENT_INAR, DIAGONAL_BINAR, FULL_BINAR)
_MODELS = {m.name: m for m in LADDER + (NO_2_TO_1, NO_1_TO_2, FULL_NO_PHI)}


def get_model(model) -> ModelSpec:
    if isinstance(model, ModelSpec):
        return model
    try:
        return _MODELS[model]
    except KeyError:
        raise DomainError(f"unknown model {model!r}; choose from {sorted(_MODELS)}") from None


# --------------------------------------------------------------------------
# reference (log-space) transition probabilities


def thinning_transition_logpmf(n: int, N_prev: Sequence[int], p_a: float, p_b: float) -> float:
    """``log sum_m Binom(m; a, p_a) Binom(n - m; b, p_b)`` with ``(a, b) = N_prev``.

    Returns ``-inf`` outside the support instead of raising.
    """
    a, b = int(N_prev[0]), int(N_prev[1])
    n = int(n)
    if n < 0 or n > a + b:
        return -math.inf
    m = np.arange(max(0, n - b), min(n, a) + 1)
    terms = stats.binom.logpmf(m, a, p_a) + stats.binom.logpmf(n - m, b, p_b)
    return float(logsumexp(terms))


def transition_logprob(n_t, n_prev, P, innov: BivPoissonParams) -> float:
    """Log P(N_t = n_t | N_{t-1} = n_prev), summed in log space."""
    P = np.asarray(ThinningMatrix.coerce(P).entries)
    n1, n2 = int(n_t[0]), int(n_t[1])
    a, b = int(n_prev[0]), int(n_prev[1])
    if min(n1, n2, a, b) < 0:
        raise DomainError("counts must be nonnegative")
    k1 = np.arange(max(n1 - a - b, 0), n1 + 1)
    k2 = np.arange(max(n2 - a - b, 0), n2 + 1)
    lp1 = np.array([thinning_transition_logpmf(n1 - k, (a, b), P[0, 0], P[0, 1]) for k in k1])
    lp2 = np.array([thinning_transition_logpmf(n2 - k, (a, b), P[1, 0], P[1, 1]) for k in k2])
    K1, K2 = np.meshgrid(k1, k2, indexing="ij")
    grid = lp1[:, None] + lp2[None, :] + bp_logpmf(K1, K2, innov)
    return float(logsumexp(grid))


# --------------------------------------------------------------------------
# likelihood


def _pairs(series) -> tuple:
    counts = series.counts if isinstance(series, CountSeries) else np.asarray(series, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[1] != 2:
        raise DomainError("likelihood is defined for bivariate series only")
    if counts.shape[0] < 2:
        raise EstimationError("series needs at least two rows")
    return np.ascontiguousarray(counts[:-1]), np.ascontiguousarray(counts[1:])


def _compress(prev: np.ndarray, cur: np.ndarray):
    rows, weights = np.unique(np.hstack([prev, cur]), axis=0, return_counts=True)
    return (
        np.ascontiguousarray(rows[:, :2]),
        np.ascontiguousarray(rows[:, 2:]),
        weights.astype(float),
    )


def conditional_loglik(series, P, innov: BivPoissonParams, per_step: bool = False):
    """Sum of log transition probabilities over consecutive rows.

    With ``per_step=True`` the array of per-transition terms is returned.
    """
    P = ThinningMatrix.coerce(P).entries
    prev, cur = _pairs(series)
    lp = _kernels.transition_logprobs(
        prev, cur, P[0, 0], P[0, 1], P[1, 0], P[1, 1], innov.lambda1, innov.lambda2, innov.phi
    )
    return lp if per_step else float(lp.sum())


# --------------------------------------------------------------------------
# parameterization


def _full_vector(model: ModelSpec, free_values) -> np.ndarray:
    theta = np.zeros(len(PARAM_NAMES))
    for name, v in zip(model.free, free_values):
        theta[PARAM_NAMES.index(name)] = v
    return theta


def _phi_cap(l1: float, l2: float) -> float:
    return min(l1, l2) * (1.0 - PHI_SLACK)


def to_unconstrained(model: ModelSpec, free_values) -> np.ndarray:
    """Map natural-scale free parameters to R^k (logit / log / scaled logit)."""
    model = get_model(model)
    nat = dict(zip(model.free, np.asarray(free_values, dtype=float)))
    z = []
    for name in model.free:
        v = nat[name]
        if name in PROB_NAMES:
            z.append(logit(v))
        elif name.startswith("lambda"):
            z.append(math.log(v))
        else:
            z.append(logit(v / _phi_cap(nat["lambda1"], nat["lambda2"])))
    return np.array(z)


def to_natural(model: ModelSpec, z) -> np.ndarray:
    """Inverse of :func:`to_unconstrained`."""
    model = get_model(model)
    zz = dict(zip(model.free, np.asarray(z, dtype=float)))
    nat = {}
    for name in model.free:
        if name in PROB_NAMES:
            nat[name] = expit(zz[name])
        elif name.startswith("lambda"):
            nat[name] = math.exp(zz[name])
    if "phi" in zz:
        nat["phi"] = expit(zz["phi"]) * _phi_cap(nat["lambda1"], nat["lambda2"])
    return np.array([nat[n] for n in model.free])


def _unpack(theta: np.ndarray):
    p11, p12, p21, p22, l1, l2, phi = theta
    return ThinningMatrix.bivariate(p11, p12, p21, p22), BivPoissonParams(l1, l2, phi)


# --------------------------------------------------------------------------
# results


@dataclass
class FitOptions:
    """Optimizer settings.

    ``method`` is ``"nelder-mead"`` (simplex with restarts) or ``"bfgs"``
    (quasi-Newton on numerical gradients).
    """

    method: str = "nelder-mead"
    max_evals: int = 20_000
    rtol: float = 1e-8
    max_restarts: int = 5
    fd_step: float = 1e-4
    min_length: int = MIN_LENGTH
    std_errors: bool = True  # skip the numerical Hessian when False


@dataclass
class FitResult:
    model: ModelSpec
    P: ThinningMatrix
    innov: BivPoissonParams
    loglik: float
    std_errors: dict
    converged: bool
    n_evals: int
    n_iter: int
    n_obs: int
    boundary: list = field(default_factory=list)
    data_key: str = ""

    @property
    def params(self) -> dict:
        p = self.P.entries
        return {
            "p11": float(p[0, 0]),
            "p12": float(p[0, 1]),
            "p21": float(p[1, 0]),
            "p22": float(p[1, 1]),
            "lambda1": self.innov.lambda1,
            "lambda2": self.innov.lambda2,
            "phi": self.innov.phi,
        }

    @property
    def theta(self) -> np.ndarray:
        return np.array([self.params[n] for n in PARAM_NAMES])

    def to_dict(self) -> dict:
        return {
            "model": self.model.name,
            "free": list(self.model.free),
            "params": self.params,
            "std_errors": {k: _jsonable(v) for k, v in self.std_errors.items()},
            "loglik": self.loglik,
            "converged": self.converged,
            "n_evals": self.n_evals,
            "n_iter": self.n_iter,
            "n_obs": self.n_obs,
            "boundary": list(self.boundary),
            "unconditional_mean": _safe_mean(self.P, self.innov),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary(self) -> str:
        """Plain-text parameter column (p's in percent, 4-decimal rates)."""
        p = self.params
        lines = [f"model: {self.model.name}   loglik: {self.loglik:.4f}"]
        for name in ("p11", "p12", "p21", "p22"):
            lines.append(f"  {name:<10}{100 * p[name]:8.2f}%   se {_fmt_se(self.std_errors.get(name), 100)}")
        for name in ("lambda1", "lambda2", "phi"):
            lines.append(f"  {name:<10}{p[name]:9.4f}   se {_fmt_se(self.std_errors.get(name), 1)}")
        mu = _safe_mean(self.P, self.innov)
        if mu is not None:
            lines.append(f"  uncond. mean (#1) {mu[0]:.4f}")
            lines.append(f"  uncond. mean (#2) {mu[1]:.4f}")
        return "\n".join(lines)


def _fmt_se(v, scale):
    if v is None or not np.isfinite(v):
        return "   n/a"
    return f"{scale * v:.4f}"


def _jsonable(v):
    return None if v is None or not np.isfinite(v) else float(v)


def _safe_mean(P, innov):
    from minar.moments import stationary_mean
    from minar.errors import StationarityError

    try:
        return [float(x) for x in stationary_mean(P, innov.mean)]
    except StationarityError:
        return None


# --------------------------------------------------------------------------
# estimation


def _data_key(counts: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(counts, dtype=np.int64).tobytes()).hexdigest()[:16]


def _moment_start(counts: np.ndarray, model: ModelSpec) -> dict:
    x_prev = counts[:-1].astype(float)
    x_cur = counts[1:].astype(float)
    m = x_cur.mean(axis=0)
    P0 = np.zeros((2, 2))
    for i in range(2):
        if "p11" in model.free or "p22" in model.free:
            sd = x_prev[:, i].std() * x_cur[:, i].std()
            rho = np.corrcoef(x_prev[:, i], x_cur[:, i])[0, 1] if sd > 0 else 0.0
            P0[i, i] = float(np.clip(np.nan_to_num(rho), 0.01, 0.9))
    if "p12" in model.free:
        P0[0, 1] = 0.01
    if "p21" in model.free:
        P0[1, 0] = 0.01
    lam = m - P0 @ m
    lam = np.maximum(lam, 0.05 * np.maximum(m, 1e-3))
    start = {"p11": P0[0, 0], "p12": P0[0, 1], "p21": P0[1, 0], "p22": P0[1, 1],
             "lambda1": lam[0], "lambda2": lam[1], "phi": 0.0}
    if "phi" in model.free:
        resid = x_cur - x_prev @ P0.T
        c = np.cov(resid[:, 0], resid[:, 1])[0, 1]
        cap = min(lam)
        start["phi"] = float(np.clip(c, 0.01 * cap, 0.9 * cap))
    return start


def _interiorize(start: dict, model: ModelSpec) -> dict:
    # an embedded nested optimum has exact zeros; nudge them just inside the domain
    out = dict(start)
    for name in model.free:
        if name in PROB_NAMES:
            out[name] = float(np.clip(out[name], 1e-12, 1 - 1e-9))
        elif name == "phi":
            cap = _phi_cap(out["lambda1"], out["lambda2"])
            out[name] = float(np.clip(out[name], 1e-12 * cap, (1 - 1e-9) * cap))
    return out


def fit_cmle(
    series,
    model=FULL_BINAR,
    options: Optional[FitOptions] = None,
    start=None,
    extra_starts: Sequence = (),
) -> FitResult:
    """Maximize the conditional log-likelihood over the model's free parameters.

    Parameters
    ----------
    series : CountSeries or (n, 2) int array
    model : ModelSpec or str
        One of the ladder rungs or Granger shapes.
    options : FitOptions, optional
    start : dict or FitResult, optional
        Starting point on the natural scale; defaults to a method-of-moments
        guess. Keys of parameters the model does not free are ignored.
    extra_starts : sequence of dict or FitResult
        Further starting points; the best optimum over all starts is kept.
        Passing the optimum of a nested model guarantees the returned
        log-likelihood is at least the nested one.

    Returns
    -------
    FitResult
    """
    model = get_model(model)
    opts = options or FitOptions()
    counts = series.counts if isinstance(series, CountSeries) else np.asarray(series, dtype=np.int64)
    if counts.ndim != 2 or counts.shape[1] != 2:
        raise DomainError("fitting is implemented for bivariate series")
    if counts.shape[0] < opts.min_length:
        raise EstimationError(f"series has {counts.shape[0]} rows; at least {opts.min_length} required")
    if np.any(counts[1:].sum(axis=0) == 0):
        raise EstimationError("a component is identically zero; innovation means are not identifiable")
    prev, cur, w = _compress(*_pairs(counts))
    n_obs = counts.shape[0] - 1

    n_evals = [0]

    def nll_natural(free_nat):
        theta = _full_vector(model, free_nat)
        n_evals[0] += 1
        v = _kernels.weighted_loglik(prev, cur, w, *theta)
        return -v if np.isfinite(v) else np.inf

    def nll(z):
        # per-observation scale keeps tolerances and gradient steps data-size free
        return nll_natural(to_natural(model, z)) / n_obs

    starts = [start if start is not None else _moment_start(counts, model)]
    starts += list(extra_starts)
    if start is not None:
        starts.append(_moment_start(counts, model))

    best = None
    total_iter = 0
    converged_any = False
    for s in starts:
        s = s.params if isinstance(s, FitResult) else dict(s)
        base = _moment_start(counts, model)
        base.update({k: v for k, v in s.items() if k in PARAM_NAMES})
        base = _interiorize(base, model)
        z0 = to_unconstrained(model, [base[n] for n in model.free])
        budget = opts.max_evals - n_evals[0]
        if budget <= 0:
            break
        z, f, ok, nit = _optimize(nll, z0, opts, budget)
        total_iter += nit
        converged_any |= ok
        if best is None or f < best[1]:
            best = (z, f, ok)

    z, f, ok = best
    f *= n_obs
    free_nat = to_natural(model, z)
    theta = _full_vector(model, free_nat)
    P, innov = _unpack(theta)
    boundary = _boundary_params(model, theta)
    if opts.std_errors:
        se = _standard_errors(nll_natural, model, free_nat, theta, opts.fd_step)
    else:
        se = {name: float("nan") for name in model.free}
    if not ok:
        logger.warning("CMLE for %s did not converge within %d evaluations", model.name, opts.max_evals)
    return FitResult(
        model=model,
        P=P,
        innov=innov,
        loglik=-float(f),
        std_errors=se,
        converged=bool(ok),
        n_evals=n_evals[0],
        n_iter=total_iter,
        n_obs=n_obs,
        boundary=boundary,
        data_key=_data_key(counts),
    )


def _optimize(fun, z0, opts: FitOptions, budget: int):
    """Minimize ``fun`` from ``z0``; returns (z, f, converged, iterations)."""
    if opts.method == "bfgs":
        res = optimize.minimize(
            fun, z0, method="BFGS", options={"maxiter": budget, "gtol": 1e-7, "eps": 1e-7}
        )
        ok = res.success or (res.status == 2 and np.linalg.norm(res.jac, np.inf) < 1e-5)
        return res.x, float(res.fun), bool(ok), int(res.nit)
    if opts.method != "nelder-mead":
        raise DomainError(f"unknown optimizer {opts.method!r}")
    z = np.clip(np.asarray(z0, dtype=float), -Z_MAX, Z_MAX)
    f = fun(z)
    nit = 0
    converged = False
    used = 0
    for attempt in range(opts.max_restarts + 1):
        # a full-size first simplex, then small ones that only confirm the optimum
        step = np.full(len(z), 0.5 if attempt == 0 else 0.05)
        step[z + step > Z_MAX] *= -1
        simplex = np.vstack([z] + [z + step[i] * np.eye(len(z))[i] for i in range(len(z))])
        res = optimize.minimize(
            fun,
            z,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "maxfev": max(budget - used, 1),
                "xatol": 1e-5,
                "fatol": opts.rtol * max(1.0, abs(f)),
                "adaptive": True,
            },
            bounds=[(-Z_MAX, Z_MAX)] * len(z),
        )
        used += res.nfev
        nit += res.nit
        improvement = f - res.fun
        if res.fun <= f:
            z, f = res.x, float(res.fun)
        if not res.success:
            converged = False
            break
        # restart until the fresh simplex brings no relative gain
        if improvement <= opts.rtol * max(1.0, abs(f)):
            converged = True
            break
        if used >= budget:
            break
    return z, f, converged, nit


def _boundary_params(model: ModelSpec, theta: np.ndarray) -> list:
    out = []
    nat = dict(zip(PARAM_NAMES, theta))
    for name in model.free:
        v = nat[name]
        if name in PROB_NAMES:
            if v < BOUNDARY_TOL or v > 1 - BOUNDARY_TOL:
                out.append(name)
        elif name == "phi":
            cap = min(nat["lambda1"], nat["lambda2"])
            if v < BOUNDARY_TOL or v > cap - BOUNDARY_TOL:
                out.append(name)
    return out


def _standard_errors(nll_natural, model: ModelSpec, free_nat, theta, h: float) -> dict:
    """Inverse observed information by central differences on the natural scale.

    Parameters closer than ``2h`` to a domain edge are left out of the
    Hessian and get ``nan``; the asymptotic normal approximation does not
    apply there.
    """
    nat = dict(zip(PARAM_NAMES, theta))
    keep = []
    for i, name in enumerate(model.free):
        v = free_nat[i]
        if name in PROB_NAMES:
            ok = 2 * h < v < 1 - 2 * h
        elif name.startswith("lambda"):
            ok = v > 2 * h and ("phi" not in model.free or v - 2 * h > nat["phi"] + 2 * h)
        else:
            ok = 2 * h < v < min(nat["lambda1"], nat["lambda2"]) - 4 * h
        if ok:
            keep.append(i)
    se = {name: float("nan") for name in model.free}
    if not keep:
        return se
    x0 = np.asarray(free_nat, dtype=float)
    f0 = nll_natural(x0)
    k = len(keep)
    H = np.zeros((k, k))

    def f_at(deltas):
        x = x0.copy()
        for idx, dv in deltas:
            x[idx] += dv
        return nll_natural(x)

    for a in range(k):
        i = keep[a]
        H[a, a] = (f_at([(i, h)]) - 2 * f0 + f_at([(i, -h)])) / h**2
        for b in range(a):
            j = keep[b]
            H[a, b] = H[b, a] = (
                f_at([(i, h), (j, h)]) - f_at([(i, h), (j, -h)])
                - f_at([(i, -h), (j, h)]) + f_at([(i, -h), (j, -h)])
            ) / (4 * h * h)
    H = 0.5 * (H + H.T)
    if not np.all(np.isfinite(H)):
        return se
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        return se
    diag = np.diag(cov)
    for a, i in enumerate(keep):
        se[model.free[i]] = float(math.sqrt(diag[a])) if diag[a] > 0 else float("nan")
    return se


# --------------------------------------------------------------------------
# tests


@dataclass
class LRTResult:
    nested: str
    full: str
    statistic: float
    df: int
    p_value: float

    def rejects(self, alpha: float = 0.05) -> bool:
        return self.df > 0 and self.p_value < alpha

    def to_dict(self) -> dict:
        return {"nested": self.nested, "full": self.full, "statistic": self.statistic,
                "df": self.df, "p_value": self.p_value}


def lrt(nested: FitResult, full: FitResult) -> LRTResult:
    """Likelihood-ratio test of ``nested`` against ``full`` (chi-square, df = #params added)."""
    if not nested.model.nested_in(full.model):
        raise DomainError(f"{nested.model.name} is not nested in {full.model.name}")
    if nested.data_key and full.data_key and nested.data_key != full.data_key:
        raise DomainError("the two fits were computed on different data")
    df = full.model.n_params - nested.model.n_params
    stat = max(0.0, 2.0 * (full.loglik - nested.loglik))
    p = 1.0 if df == 0 else float(stats.chi2.sf(stat, df))
    if df == 0:
        stat = 0.0
    return LRTResult(nested.model.name, full.model.name, stat, df, p)


@dataclass
class CausalityReport:
    instantaneous: LRTResult
    lagged: dict
    classification: str
    fits: dict
    alpha: float = 0.05

    def to_dict(self) -> dict:
        return {
            "instantaneous": self.instantaneous.to_dict(),
            "lagged": {k: v.to_dict() for k, v in self.lagged.items()},
            "classification": self.classification,
            "alpha": self.alpha,
            "loglik": {k: f.loglik for k, f in self.fits.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def classify(lagged: dict, alpha: float = 0.05) -> str:
    """Lagged-causality label from the three constraint tests.

    ``"independent"`` when the diagonal shape survives; otherwise
    ``"1->2"``, ``"1<-2"`` or ``"1<->2"`` depending on which zero
    restrictions are rejected.
    """
    if not lagged["diagonal"].rejects(alpha):
        return "independent"
    two_to_one = lagged["no-2-to-1"].rejects(alpha)  # p12 = 0 rejected
    one_to_two = lagged["no-1-to-2"].rejects(alpha)  # p21 = 0 rejected
    if two_to_one and one_to_two:
        return "1<->2"
    if two_to_one:
        return "1<-2"
    if one_to_two:
        return "1->2"
    # diagonal rejected jointly but neither single restriction: keep the stronger link
    return "1<-2" if lagged["no-2-to-1"].statistic >= lagged["no-1-to-2"].statistic else "1->2"


def granger_tests(series, options: Optional[FitOptions] = None, alpha: float = 0.05) -> CausalityReport:
    """Fit the full model and its constrained shapes and run the causality LRTs."""
    diag = fit_cmle(series, DIAGONAL_BINAR, options)
    no21 = fit_cmle(series, NO_2_TO_1, options, extra_starts=[diag])
    no12 = fit_cmle(series, NO_1_TO_2, options, extra_starts=[diag])
    full = fit_cmle(series, FULL_BINAR, options, extra_starts=[no21, no12])
    nophi = fit_cmle(series, FULL_NO_PHI, options, extra_starts=[full])
    lagged = {
        "diagonal": lrt(diag, full),
        "no-2-to-1": lrt(no21, full),
        "no-1-to-2": lrt(no12, full),
    }
    fits = {f.model.name: f for f in (diag, no21, no12, full, nophi)}
    return CausalityReport(lrt(nophi, full), lagged, classify(lagged, alpha), fits, alpha)
