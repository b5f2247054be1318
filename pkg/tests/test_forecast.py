import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minar.errors import DomainError
from minar.forecast import forecast, forecast_mean, forecast_var, mc_tail_table
from minar.innovations import BivPoissonParams
from minar.moments import stationary_mean
from minar.process import ThinningMatrix, simulate_paths

from conftest import random_params


def scalar_var(p, lam, sigma2, N, h):
    """Univariate INAR(1) h-step variance, summed term by term."""
    total = p ** h * (1 - p ** h) * N + sigma2 * (1 - p ** (2 * h)) / (1 - p ** 2)
    total += p * lam * ((1 - p ** (2 * h)) / (1 - p ** 2) - p ** (h - 1) * (1 - p ** h) / (1 - p))
    return total


def test_spot_value(owp24):
    P, innov = owp24
    m = forecast_mean(P, innov.mean, [1, 3], 1)
    assert round(m[0], 4) == 0.3277
    n, k = 4, 2
    assert forecast_mean(P, innov.mean, [n, k], 1)[0] == pytest.approx(0.0817 * n + 0.028 * k + 0.162, abs=1e-12)


def test_zero_horizon(owp24):
    P, innov = owp24
    np.testing.assert_array_equal(forecast_mean(P, innov.mean, [2, 5], 0), [2, 5])
    np.testing.assert_array_equal(forecast_var(P, innov, [2, 5], 0), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        forecast_mean(P, innov.mean, [2, 5], -1)


def test_zero_P():
    for h in (1, 3, 10):
        np.testing.assert_allclose(forecast_mean(np.zeros((2, 2)), [5, 3], [40, 2], h), [5, 3])


def test_diagonal_mean_closed_form():
    p = np.array([0.3, 0.55])
    lam = np.array([1.2, 0.4])
    N = np.array([7, 2])
    for h in (1, 2, 5, 13):
        want = p ** h * N + (1 - p ** h) / (1 - p) * lam
        np.testing.assert_allclose(forecast_mean(np.diag(p), lam, N, h), want, rtol=1e-13)


def test_var_base_case(owp24):
    P, innov = owp24
    N = np.array([23, 46])
    np.testing.assert_allclose(forecast_var(P, innov, N, 1), np.diag(P.variance_matrix @ N) + innov.cov, rtol=1e-14)


def test_diagonal_var_closed_form():
    p = np.array([0.3, 0.55])
    innov = BivPoissonParams(1.2, 0.4, 0.1)
    N = np.array([7, 2])
    for h in (1, 2, 5, 13):
        V = forecast_var(np.diag(p), innov, N, h)
        for i, lam in enumerate((1.2, 0.4)):
            assert V[i, i] == pytest.approx(scalar_var(p[i], lam, lam, N[i], h), rel=1e-12)


@given(st.integers(0, 2**32), st.integers(1, 12))
@settings(max_examples=80, deadline=None)
def test_var_symmetric_psd(seed, h):
    gen = np.random.default_rng(seed)
    P, innov = random_params(gen)
    N = gen.integers(0, 50, 2)
    V = forecast_var(P, innov, N, h)
    assert np.array_equal(V, V.T)
    assert np.linalg.eigvalsh(V).min() >= -1e-10
    assert np.all(forecast_mean(P, innov.mean, N, h) >= 0)


def test_var_recursion_definition(owp24):
    # V_h(N) = E[V_{h-1}(P o N + eps) | N] + P^{h-1} V_1(N) P^{h-1}'  with V_{h-1} affine in N
    P, innov = owp24
    N = np.array([23, 46])
    M = P.entries
    for h in (2, 3, 6):
        m1 = forecast_mean(P, innov.mean, N, 1)
        base = forecast_var(P, innov, np.zeros(2), h - 1)
        slope = [forecast_var(P, innov, e, h - 1) - base for e in np.eye(2)]
        expect = base + m1[0] * slope[0] + m1[1] * slope[1]
        Ph = np.linalg.matrix_power(M, h - 1)
        want = expect + Ph @ forecast_var(P, innov, N, 1) @ Ph.T
        np.testing.assert_allclose(forecast_var(P, innov, N, h), want, rtol=1e-12)


def test_mean_limit(owp24):
    P, innov = owp24
    np.testing.assert_allclose(forecast_mean(P, innov.mean, [23, 46], 200), stationary_mean(P, innov.mean), atol=1e-8)


def test_forecast_bundle(owp24):
    P, innov = owp24
    out = forecast(P, innov, [1, 3], [1, 2])
    assert [r.horizon for r in out] == [1, 2] and out[0].method == "analytic"


def test_var_matches_simulation_small(owp24):
    P, innov = owp24
    paths = simulate_paths(P, innov, [23, 46], 2, 200_000, 3)
    for h in (1, 2):
        x = paths[:, h, :].astype(float)
        emp = np.cov(x.T)
        V = forecast_var(P, innov, [23, 46], h)
        # fourth-moment based standard error of each covariance entry
        xc = x - x.mean(axis=0)
        for i in range(2):
            for j in range(2):
                se = np.std(xc[:, i] * xc[:, j]) / np.sqrt(len(x))
                assert abs(emp[i, j] - V[i, j]) < 4 * se


@pytest.fixture(scope="module")
def table():
    P = ThinningMatrix.bivariate(0.0817, 0.028, 0.106, 0.1552)
    innov = BivPoissonParams(0.162, 0.4261, 0.0269)
    return mc_tail_table(P, innov, [23, 46], [1, 2, 7, 30], [0, 1, 10, 20, 40], paths=20_000, rng=5)


class TestTailTable:
    def test_zero_threshold(self, table):
        assert np.all(table.probabilities[0] == 1.0)

    def test_monotone(self, table):
        pr = table.probabilities
        assert np.all(np.diff(pr, axis=0) <= 0)
        assert np.all(np.diff(pr, axis=1) >= 0)
        assert np.all((pr >= 0) & (pr <= 1))

    def test_reproducible(self, table):
        P = ThinningMatrix.bivariate(0.0817, 0.028, 0.106, 0.1552)
        innov = BivPoissonParams(0.162, 0.4261, 0.0269)
        again = mc_tail_table(P, innov, [23, 46], [1, 2, 7, 30], [0, 1, 10, 20, 40], paths=20_000, rng=5)
        assert again.to_csv() == table.to_csv()
        other = mc_tail_table(P, innov, [23, 46], [1, 2, 7, 30], [0, 1, 10, 20, 40], paths=20_000, rng=6)
        assert other.to_csv() != table.to_csv()

    def test_csv_layout(self, table, tmp_path):
        text = table.to_csv(tmp_path / "t.csv")
        lines = text.splitlines()
        assert lines[0] == "n / days,1,2,7,30"
        assert lines[1].startswith("0,1.0,")
        se = table.to_csv(std_errors=True).splitlines()
        assert se[1] == "0,0.0,0.0,0.0,0.0"
        assert "n / days" in table.format()

    def test_validation(self):
        with pytest.raises(DomainError):
            mc_tail_table(np.eye(2) * 0.1, BivPoissonParams(1, 1), [0, 0], [1], [0], paths=0)
        with pytest.raises(DomainError):
            mc_tail_table(np.eye(2) * 0.1, BivPoissonParams(1, 1), [0, 0], [0], [0], paths=10)


def test_ergodicity(owp24):
    P, innov = owp24
    # S_T differs by the transient sum_k P^k N0; compare the last-step totals instead
    a = simulate_paths(P, innov, [0, 0], 200, 20_000, 1)[:, -1].sum(axis=1)
    b = simulate_paths(P, innov, [40, 60], 200, 20_000, 2)[:, -1].sum(axis=1)
    for n in (1, 2, 3):
        pa, pb = (a >= n).mean(), (b >= n).mean()
        se = np.sqrt(pa * (1 - pa) / len(a) + pb * (1 - pb) / len(b))
        assert abs(pa - pb) < 4 * se


def test_full_exceeds_diagonal_tail(owp24):
    P, innov = owp24
    D = np.diag(np.diag(P.entries))
    kw = dict(N0=[23, 46], horizons=[1, 2], thresholds=[20, 25], paths=50_000, rng=9)
    full = mc_tail_table(P, innov, **kw)
    diag = mc_tail_table(D, innov, **kw)
    assert np.all(full.probabilities > diag.probabilities)
