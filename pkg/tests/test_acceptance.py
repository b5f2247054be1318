"""Acceptance criteria, one test per criterion (criterion 2 per table row).

Each test prints a single ``criterion k: PASS|FAIL`` line with the numbers
behind the verdict, so ``pytest -v -s tests/test_acceptance.py`` doubles as
a report. Tolerances are the ones fixed by the acceptance list; nothing is
loosened to make a row pass.
"""
import numpy as np
import pytest
from scipy import stats

from minar.catalog import BinningSpec, bin_counts, load_regions, parse_catalog
from minar.experiments import OKHOTSK_WEST_PACIFIC, SET_1, SET_2, StudySpec, run_estimator_study, simulate_replication
from minar.forecast import forecast_mean, forecast_var, mc_tail_table
from minar.inference import DIAGONAL_BINAR, FULL_BINAR, PARAM_NAMES, fit_cmle, lrt, transition_logprob
from minar.innovations import BivPoissonParams, bp_logpmf
from minar.moments import moments_report, stationary_mean
from minar.process import RandomSource, ThinningMatrix, simulate_paths

from oracles import brute_force_transition, convolution_pmf

HOURS = (3, 12, 24, 48)


def report(capsys, label, ok, detail):
    with capsys.disabled():
        print(f"\n{label}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def owp(h):
    v = OKHOTSK_WEST_PACIFIC[h]
    return v["P"], v["innov"]


# -- 1. closed-form means --------------------------------------------------

PUBLISHED_MEANS = {3: (0.0241, 0.0661), 12: (0.0963, 0.2643), 24: (0.1926, 0.5285), 48: (0.3852, 1.0570)}


def test_criterion_1_stationary_means(capsys):
    worst = 0.0
    for h in HOURS:
        P, innov = owp(h)
        worst = max(worst, np.abs(stationary_mean(P, innov.mean) - PUBLISHED_MEANS[h]).max())
    report(capsys, "criterion 1", worst <= 0.0005, f"max |error| {worst:.5f}, tol 0.0005")


# -- 2. second moments, per row of the moments table -----------------------

PUBLISHED_MOMENTS = {
    "E(N1_t)": (0.024, 0.096, 0.192, 0.385),
    "E(N2_t)": (0.065, 0.264, 0.528, 1.057),
    "var(N1_t)": (0.022, 0.084, 0.167, 0.326),
    "var(N2_t)": (0.060, 0.239, 0.466, 0.934),
    "cor(N1_t,N2_t)": (0.038, 0.079, 0.110, 0.150),
    "cor(N1_t,N1_t-1)": (0.062, 0.075, 0.086, 0.109),
    "cor(N2_t,N2_t-1)": (0.108, 0.138, 0.162, 0.165),
    "cor(N1_t,N2_t-1)": (0.033, 0.053, 0.055, 0.068),
}


@pytest.mark.parametrize("row", list(PUBLISHED_MOMENTS))
def test_criterion_2_second_moments(capsys, row):
    got = []
    for h in HOURS:
        P, innov = owp(h)
        got.append(moments_report(P, innov.mean, innov.cov)[row])
    err = np.abs(np.array(got) - PUBLISHED_MOMENTS[row])
    shown = ", ".join(f"{h}h {g:.4f} vs {w:.3f}" for h, g, w in zip(HOURS, got, PUBLISHED_MOMENTS[row]))
    report(capsys, f"criterion 2 [{row}]", err.max() <= 0.002, f"{shown}; tol 0.002")


# -- 3. forecast spot value ------------------------------------------------

def test_criterion_3_forecast_spot_value(capsys):
    P, innov = owp(24)
    m = forecast_mean(P, innov.mean, [1, 3], 1)[0]
    report(capsys, "criterion 3", round(m, 4) == 0.3277, f"E[N1 | N=(1,3)] = {m:.6f}")


# -- 4. estimator study ----------------------------------------------------

# Standard deviations of the estimates for the first parameter set (probabilities as fractions)
PUBLISHED_SET1_STDEVS = {
    1000: (0.0294, 0.0322, 0.0274, 0.0255, 0.2587, 0.2144, 0.1813),
    10000: (0.0092, 0.0100, 0.0083, 0.0084, 0.0841, 0.0660, 0.0568),
}


@pytest.fixture(scope="module")
def set1_study():
    return run_estimator_study(StudySpec(sizes=(1000, 10000), replications=100, seed=2024, **SET_1))


def test_criterion_4a_set1_unbiased(capsys, set1_study):
    r = set1_study
    z = (r.means - r.spec.truth) / r.mean_std_errors
    worst = np.unravel_index(np.nanargmax(np.abs(z)), z.shape)
    ok = bool(np.all(np.abs(z) <= 3)) and not r.excluded.any()
    detail = (f"max |mean - truth| / SE = {abs(z[worst]):.2f} at n={r.spec.sizes[worst[0]]} "
              f"{PARAM_NAMES[worst[1]]}; excluded {r.excluded.tolist()}")
    report(capsys, "criterion 4a", ok, detail)


def test_criterion_4b_set1_spread(capsys, set1_study):
    r = set1_study
    ratios = np.array([r.stdevs[r.row(n)] / np.array(PUBLISHED_SET1_STDEVS[n]) for n in (1000, 10000)])
    ok = bool(np.all((ratios >= 1 / 1.5) & (ratios <= 1.5)))
    detail = f"stdev / printed stdev in [{ratios.min():.2f}, {ratios.max():.2f}], band [0.67, 1.5]"
    report(capsys, "criterion 4b", ok, detail)


def test_criterion_4c_set2_cross_terms(capsys):
    r = run_estimator_study(StudySpec(sizes=(10000,), replications=100, seed=2025, **SET_2))
    est = r.estimates[0][r.included[0]]
    m12, m21 = np.abs(est[:, 1]).mean(), np.abs(est[:, 2]).mean()
    ok = m12 < 0.01 and m21 < 0.01 and not r.excluded.any()
    report(capsys, "criterion 4c", ok, f"mean |p12| {m12:.4%}, mean |p21| {m21:.4%}, excluded {int(r.excluded[0])}")


# -- 5. LRT calibration under a diagonal truth -----------------------------

def test_criterion_5_lrt_calibration(capsys):
    spec = StudySpec(sizes=(2000,), replications=200, seed=77, **SET_2)
    statistic = []
    for k in range(spec.replications):
        counts = simulate_replication(spec, 2000, k)
        dg = fit_cmle(counts, DIAGONAL_BINAR)
        fb = fit_cmle(counts, FULL_BINAR, extra_starts=[dg])
        statistic.append(lrt(dg, fb).statistic)
    statistic = np.array(statistic)
    ks = stats.kstest(statistic, stats.chi2(2).cdf).pvalue
    rate = float(np.mean(statistic > 5.99))
    ok = ks > 0.01 and 0.02 <= rate <= 0.09
    report(capsys, "criterion 5", ok, f"KS p = {ks:.4f} (need > 0.01), rejection rate {rate:.3f} (need [0.02, 0.09])")


# -- 6. risk table ---------------------------------------------------------

def test_criterion_6_risk_table(capsys):
    P, innov = owp(24)
    kw = dict(N0=[23, 46], horizons=[1, 3, 7, 14, 30], thresholds=[5, 10, 15, 20, 25, 30, 40, 50],
              paths=100_000, rng=8)
    table = mc_tail_table(P, innov, **kw)
    again = mc_tail_table(P, innov, **kw)
    pr = table.probabilities
    p20 = pr[3, 0]
    monotone = bool(np.all(np.diff(pr, axis=0) <= 0) and np.all(np.diff(pr, axis=1) >= 0))
    same = again.to_csv() == table.to_csv()
    ok = 0.03 <= p20 <= 0.10 and monotone and same
    detail = f"P(S>=20, T=1) = {p20:.4f} +/- {table.std_errors[3, 0]:.4f}; monotone {monotone}; reproducible {same}"
    report(capsys, "criterion 6", ok, detail)


# -- 7. oracle equivalence -------------------------------------------------

def test_criterion_7_oracles(capsys):
    gen = np.random.default_rng(7)
    worst_t = 0.0
    for _ in range(60):
        P = gen.uniform(0.0, 1.0, size=(2, 2))
        l1, l2 = gen.uniform(0.1, 4.0, size=2)
        innov = BivPoissonParams(l1, l2, gen.uniform(0.0, min(l1, l2)))
        n_prev = gen.integers(0, 5, 2)
        n_t = gen.integers(0, 5, 2)
        want = brute_force_transition(n_t, n_prev, P, innov)
        got = np.exp(transition_logprob(n_t, n_prev, ThinningMatrix(P), innov))
        worst_t = max(worst_t, abs(got - want) / want)
    worst_p = 0.0
    for innov in (BivPoissonParams(5.0, 3.0, 1.0), owp(24)[1], BivPoissonParams(2.0, 2.0, 1.9)):
        k = np.arange(20)
        got = np.exp(bp_logpmf(k[:, None], k[None, :], innov))
        want = np.array([[convolution_pmf(a, b, innov.lambda1, innov.lambda2, innov.phi) for b in k] for a in k])
        worst_p = max(worst_p, (np.abs(got - want) / want).max())
    ok = worst_t <= 1e-10 and worst_p <= 1e-12
    report(capsys, "criterion 7", ok, f"transition max rel err {worst_t:.2e} (60 cases), pmf max rel err {worst_p:.2e}")


# -- 8. forecast variance against simulation -------------------------------

def test_criterion_8_forecast_variance(capsys):
    P, innov = owp(24)
    N0 = [23, 46]
    paths = simulate_paths(P, innov, N0, 5, 1_000_000, RandomSource(88))
    worst = 0.0
    for h in (1, 2, 5):
        x = paths[:, h, :].astype(float)
        xc = x - x.mean(axis=0)
        emp = np.cov(x.T)
        V = forecast_var(P, innov, N0, h)
        for i in range(2):
            for j in range(2):
                se = np.std(xc[:, i] * xc[:, j]) / np.sqrt(len(x))
                worst = max(worst, abs(emp[i, j] - V[i, j]) / se)
    report(capsys, "criterion 8", worst < 4, f"max |empirical - analytic| = {worst:.2f} MC SE, limit 4")


# -- 9. ingestion fixture --------------------------------------------------

def test_criterion_9_ingestion_fixture(capsys):
    import json
    from importlib.resources import files

    data = files("minar") / "data"
    cfg = json.loads((data / "mini_config.json").read_text())
    parsed = parse_catalog(str(data / "mini_catalog.csv"))
    spec = BinningSpec(cfg["window_hours"], cfg["start"], cfg["end"], mag_lo=cfg["mag_lo"])
    text = bin_counts(parsed.events, load_regions(str(data / "mini_plates.json")), spec, cfg["plates"]).to_csv()
    expected = (data / "mini_expected.csv").read_text()
    report(capsys, "criterion 9", text == expected, f"{len(text.splitlines()) - 1} windows, byte-exact {text == expected}")
