import numpy as np
import pytest

from cointkit.cointegration import (
    ardl_bounds_test,
    dols_fit,
    engle_granger_test,
    pesaran_critical_values,
)
from cointkit.errors import (
    IntegrationOrderViolation,
    InvalidLag,
    SampleTooSmall,
    UnsupportedCase,
)
from cointkit.regress import ols_fit
from cointkit.series import series_from_values


def rw(rng, n, scale=1.0):
    return np.cumsum(rng.normal(0.0, scale, size=n))


class TestPesaranBounds:
    def test_one_percent_upper_bound_443(self):
        i0, i1 = pesaran_critical_values(6, case=3, level=0.01)
        assert i1 == 4.43
        assert i0 < i1

    def test_bounds_monotone_in_level_and_ordered(self):
        for k in range(1, 11):
            prev_i0, prev_i1 = np.inf, np.inf
            for level in (0.01, 0.025, 0.05, 0.10):
                i0, i1 = pesaran_critical_values(k, 3, level)
                assert i0 < i1, f"k={k} level={level}"
                assert i1 < prev_i1 and i0 < prev_i0, f"k={k} level={level}"
                prev_i0, prev_i1 = i0, i1

    def test_unsupported(self):
        with pytest.raises(UnsupportedCase):
            pesaran_critical_values(6, case=4, level=0.05)
        with pytest.raises(UnsupportedCase):
            pesaran_critical_values(11, 3, 0.05)
        with pytest.raises(UnsupportedCase):
            pesaran_critical_values(6, 3, 0.02)


class TestArdlBounds:
    def test_exact_cointegration_f_far_above_upper_bound(self):
        rng = np.random.default_rng(80)
        x = rw(rng, 60)
        y = 2.0 * x + rng.normal(0.0, 1e-6, size=60)
        r = ardl_bounds_test(y, {"x": x})
        _, i1 = pesaran_critical_values(1, 3, 0.01)
        assert r.f_statistic > 2.0 * i1, f"F {r.f_statistic} vs 1% upper bound {i1}"
        assert r.verdict(0.01) == "cointegrated"

    def test_independent_walks_rarely_cointegrated(self):
        rng = np.random.default_rng(81)
        hits = 0
        draws = 500
        for _ in range(draws):
            y = rw(rng, 60)
            x = rw(rng, 60)
            r = ardl_bounds_test(y, {"x": x})
            if r.verdict(0.05) == "cointegrated":
                hits += 1
        rate = hits / draws
        assert rate <= 0.10, f"spurious cointegration rate {rate}"

    def test_scale_invariance_of_f(self):
        rng = np.random.default_rng(82)
        x1, x2 = rw(rng, 50), rw(rng, 50)
        y = 0.5 * x1 - 0.3 * x2 + rng.normal(size=50)
        r1 = ardl_bounds_test(y, {"x1": x1, "x2": x2})
        r2 = ardl_bounds_test(1000.0 * y, {"x1": 0.01 * x1, "x2": 50.0 * x2})
        assert np.isclose(r1.f_statistic, r2.f_statistic, rtol=1e-8)
        assert r1.verdicts == r2.verdicts
        assert r1.lags == r2.lags

    def test_verdict_matches_bounds_comparison(self):
        rng = np.random.default_rng(83)
        x = rw(rng, 60)
        y = 0.8 * x + rng.normal(size=60)
        r = ardl_bounds_test(y, {"x": x})
        for level, (i0, i1) in r.critical_bounds.items():
            v = r.verdict(level)
            if r.f_statistic > i1:
                assert v == "cointegrated"
            elif r.f_statistic < i0:
                assert v == "not_cointegrated"
            else:
                assert v == "inconclusive"

    def test_exog_dummy_not_counted_in_k(self):
        rng = np.random.default_rng(84)
        n = 40
        x = rw(rng, n)
        y = 0.5 * x + rng.normal(size=n)
        y[20:] += 4.0
        d = np.zeros(n)
        d[20] = 1.0
        r = ardl_bounds_test(y, {"x": x}, exog={"d_break": d})
        assert r.k == 1
        assert "d_break" in r.regression.names
        assert r.critical_bounds[0.05] == pesaran_critical_values(1, 3, 0.05)

    def test_lags_selected_within_grid(self):
        rng = np.random.default_rng(85)
        x = rw(rng, 60)
        y = 0.6 * x + rng.normal(size=60)
        r = ardl_bounds_test(y, {"x": x}, p=2, q=2)
        assert 1 <= r.lags[0] <= 2
        assert 0 <= r.lags[1] <= 2
        r2 = ardl_bounds_test(y, {"x": x}, p=2, q=2)
        assert r2.f_statistic == r.f_statistic and r2.lags == r.lags

    def test_sample_too_small(self):
        rng = np.random.default_rng(86)
        n = 16
        xs = {f"x{j}": rw(rng, n) for j in range(3)}
        with pytest.raises(SampleTooSmall):
            ardl_bounds_test(rw(rng, n), xs)

    def test_integration_order_violation(self):
        rng = np.random.default_rng(87)
        x = rw(rng, 50)
        y = 0.5 * x + rng.normal(size=50)
        with pytest.raises(IntegrationOrderViolation):
            ardl_bounds_test(y, {"x": x}, integration_orders={"x": "I2"})
        with pytest.raises(IntegrationOrderViolation):
            ardl_bounds_test(y, {"x": x}, integration_orders={"y": 2})
        r = ardl_bounds_test(y, {"x": x}, integration_orders={"x": "I1", "y": "I0"})
        assert r.k == 1

    def test_annual_series_input(self):
        rng = np.random.default_rng(88)
        x = series_from_values("x", 1990, rw(rng, 35))
        y = series_from_values("remit", 1990, 0.4 * x.values + rng.normal(size=35))
        r = ardl_bounds_test(y, {"x": x})
        assert "remit_l1" in r.regression.names
        assert r.nobs == 35 - 1 - max(r.lags)


class TestEngleGranger:
    def test_perfect_cointegration(self):
        rng = np.random.default_rng(90)
        x = rw(rng, 50)
        r = engle_granger_test(x.copy(), {"x": x})
        assert r.p_value < 1e-6
        assert r.statistic < -10 or r.statistic == -np.inf

    def test_near_perfect_cointegration(self):
        rng = np.random.default_rng(91)
        x = rw(rng, 50)
        y = 2.0 * x + rng.normal(0.0, 0.01, size=50)
        r = engle_granger_test(y, {"x": x})
        assert r.rejects(0.01)
        assert r.statistic < -3.0

    def test_size_against_adjusted_critical_values(self):
        rng = np.random.default_rng(92)
        draws, hits = 500, 0
        for _ in range(draws):
            y, x = rw(rng, 60), rw(rng, 60)
            r = engle_granger_test(y, {"x": x})
            if r.statistic < r.crit_values[0.05]:
                hits += 1
        rate = hits / draws
        assert 0.02 <= rate <= 0.09, f"size vs adjusted critical values {rate}"

    def test_constant_shift_invariance(self):
        rng = np.random.default_rng(93)
        x = rw(rng, 40)
        y = 0.7 * x + rng.normal(size=40)
        r1 = engle_granger_test(y, {"x": x})
        r2 = engle_granger_test(y + 100.0, {"x": x})
        assert abs(r1.statistic - r2.statistic) < 1e-8

    def test_reported_conventions(self):
        rng = np.random.default_rng(94)
        xs = {f"x{j}": rw(rng, 50) for j in range(3)}
        y = sum(xs.values()) + rng.normal(size=50)
        r = engle_granger_test(y, xs)
        assert r.params["k"] == 3
        assert set(r.crit_values) == {0.01, 0.05, 0.10}
        # adjusted critical values must widen with k
        r1 = engle_granger_test(y, {"x0": xs["x0"]})
        assert r.crit_values[0.05] < r1.crit_values[0.05]


class TestDols:
    def test_zero_leads_lags_is_plain_ols(self):
        rng = np.random.default_rng(100)
        x = rw(rng, 40)
        z = rw(rng, 40)
        y = 1.0 + 0.5 * x - 0.2 * z + rng.normal(size=40)
        d = dols_fit(y, {"x": x, "z": z}, leads=0, lags=0)
        o = ols_fit(y, {"x": x, "z": z}, intercept=True)
        assert np.array_equal(d.regression.params, o.params)
        assert d.regression.n == o.n

    def test_noiseless_exogenous_matches_ols(self):
        rng = np.random.default_rng(101)
        x = rw(rng, 50)
        y = 1.0 + 2.0 * x
        d = dols_fit(y, {"x": x}, leads=1, lags=1)
        o = ols_fit(y, {"x": x}, intercept=True)
        assert abs(d.coef("x") - o.coef("x")) < 1e-8
        assert abs(d.coef("const") - o.coef("const")) < 1e-8

    def test_sample_trim_and_nuisance_exclusion(self):
        rng = np.random.default_rng(102)
        n = 32
        x = rw(rng, n)
        y = 0.5 * x + rng.normal(size=n)
        d = dols_fit(y, {"x": x}, leads=1, lags=1)
        assert d.regression.n == n - 1 - 1 - 1
        table_names = [row["name"] for row in d.long_run_table()]
        assert table_names == ["const", "x"]
        assert any(nm.startswith("d_x") for nm in d.regression.names)
        assert d.regression.cov_kind.startswith("HAC")

    def test_bias_reduction_under_endogenous_regressor(self):
        rng = np.random.default_rng(103)
        draws, n, beta = 500, 100, 2.0
        ols_err, dols_err = [], []
        for _ in range(draws):
            v = rng.normal(size=n + 2)
            e = rng.normal(size=n)
            x = np.cumsum(v[1 : n + 1])
            u = 1.0 * v[1 : n + 1] + 0.8 * v[2 : n + 2] + 0.8 * v[:n] + 0.5 * e
            y = beta * x + u
            ols_err.append(ols_fit(y, {"x": x}).coef("x") - beta)
            dols_err.append(dols_fit(y, {"x": x}, 1, 1).coef("x") - beta)
        bias_ols = abs(float(np.mean(ols_err)))
        bias_dols = abs(float(np.mean(dols_err)))
        assert bias_dols < bias_ols, f"dols {bias_dols} vs ols {bias_ols}"

    def test_sample_too_small(self):
        rng = np.random.default_rng(104)
        n = 14
        xs = {f"x{j}": rw(rng, n) for j in range(3)}
        with pytest.raises(SampleTooSmall):
            dols_fit(rng.normal(size=n), xs, leads=2, lags=2)

    def test_negative_leads_rejected(self):
        rng = np.random.default_rng(105)
        x = rw(rng, 30)
        with pytest.raises(InvalidLag):
            dols_fit(rng.normal(size=30), {"x": x}, leads=-1, lags=1)
