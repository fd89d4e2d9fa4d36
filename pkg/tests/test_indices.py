import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cointkit.errors import (
    BaseYearOutOfWindow,
    DegenerateMatrix,
    MissingWeight,
    NonPositiveValue,
    NotStandardized,
    ZeroVariance,
)
from cointkit.indices import (
    MCI_RATE_NAMES,
    external_demand_index,
    monetary_conditions_index,
    pca,
    trade_weighted_index,
)
from cointkit.series import align_dataset, series_from_values, zscore


def zscore_cols(m):
    return (m - m.mean(axis=0)) / m.std(axis=0, ddof=1)


def eig3_sym(a):
    """Closed-form eigen-solution of a symmetric 3x3 via the characteristic
    polynomial (trigonometric cubic), independent of np.linalg."""
    q = (a[0, 0] + a[1, 1] + a[2, 2]) / 3.0
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    detb = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    phi = np.arccos(np.clip(detb / 2.0, -1.0, 1.0)) / 3.0
    lam1 = q + 2.0 * p * np.cos(phi)
    lam3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    lam2 = 3.0 * q - lam1 - lam3
    lams = np.array([lam1, lam2, lam3])

    vecs = []
    for lam in lams:
        m = a - lam * np.eye(3)
        # null vector via the largest cross product of two rows
        cands = [np.cross(m[i], m[j]) for i, j in [(0, 1), (0, 2), (1, 2)]]
        v = max(cands, key=lambda c: float(np.dot(c, c)))
        v = v / np.sqrt(np.dot(v, v))
        s = v.sum()
        if s < 0 or (s == 0 and v[np.flatnonzero(v)[0]] < 0):
            v = -v
        vecs.append(v)
    return lams, np.column_stack(vecs)


class TestPca:
    def test_identical_columns_pc1_explains_all(self):
        rng = np.random.default_rng(40)
        col = rng.normal(size=25)
        z = zscore_cols(np.column_stack([col, col]))
        r = pca(z)
        assert abs(r.explained_variance_ratio[0] - 1.0) < 1e-10

    def test_orthogonal_columns_split_evenly(self):
        a = np.array([1.0, 1.0, -1.0, -1.0])
        b = np.array([1.0, -1.0, 1.0, -1.0])
        z = zscore_cols(np.column_stack([a, b]))
        r = pca(z)
        assert np.all(np.abs(r.explained_variance_ratio - 0.5) < 1e-10), (
            f"ratios {r.explained_variance_ratio}"
        )

    def test_loadings_match_characteristic_polynomial_oracle(self):
        rng = np.random.default_rng(41)
        z = zscore_cols(rng.normal(size=(60, 3)) @ rng.normal(size=(3, 3)))
        corr = z.T @ z / (z.shape[0] - 1)
        lams, vecs = eig3_sym(corr)
        r = pca(z)
        assert np.max(np.abs(r.loadings - vecs)) < 1e-8
        expected_ratio = lams / lams.sum()
        assert np.max(np.abs(r.explained_variance_ratio - expected_ratio)) < 1e-8

    def test_not_standardized_mean(self):
        rng = np.random.default_rng(42)
        z = zscore_cols(rng.normal(size=(20, 2)))
        with pytest.raises(NotStandardized):
            pca(z + 0.5)

    def test_not_standardized_scale(self):
        rng = np.random.default_rng(43)
        z = zscore_cols(rng.normal(size=(20, 2)))
        with pytest.raises(NotStandardized):
            pca(z * 2.0)

    def test_missing_entry_rejected(self):
        rng = np.random.default_rng(44)
        z = zscore_cols(rng.normal(size=(20, 2)))
        z = z.copy()
        z[3, 1] = np.nan
        with pytest.raises(NotStandardized):
            pca(z)

    def test_degenerate_shapes(self):
        with pytest.raises(DegenerateMatrix):
            pca(np.empty((0, 3)))
        with pytest.raises(DegenerateMatrix):
            pca(np.zeros((1, 3)))

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(min_value=4, max_value=30),
        p=st.integers(min_value=1, max_value=6),
        seed=st.integers(min_value=0, max_value=10_000),
    )
    def test_reconstruction_and_structure(self, n, p, seed):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(n, p))
        std = m.std(axis=0, ddof=1)
        if np.any(std < 1e-8):
            return
        z = zscore_cols(m)
        r = pca(z)
        # full reconstruction with all components retained
        assert np.max(np.abs(r.scores @ r.loadings.T - z)) < 1e-8
        # orthonormal loadings
        gram = r.loadings.T @ r.loadings
        assert np.max(np.abs(gram - np.eye(p))) < 1e-10
        # ratio structure
        ratios = r.explained_variance_ratio
        assert abs(ratios.sum() - 1.0) < 1e-10
        assert np.all(np.diff(ratios) <= 1e-12)
        # score columns centered
        assert np.max(np.abs(r.scores.mean(axis=0))) < 1e-10

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(45)
        for _ in range(20):
            z = zscore_cols(rng.normal(size=(30, 5)) @ rng.normal(size=(5, 5)))
            r = pca(z)
            perm = rng.permutation(5)
            rp = pca(z[:, perm])
            assert np.max(np.abs(rp.loadings - r.loadings[perm, :])) < 1e-10
            assert np.max(np.abs(rp.scores - r.scores)) < 1e-10

    def test_deterministic_rerun(self):
        rng = np.random.default_rng(46)
        z = zscore_cols(rng.normal(size=(25, 4)))
        r1, r2 = pca(z), pca(z)
        assert np.array_equal(r1.loadings, r2.loadings)
        assert np.array_equal(r1.scores, r2.scores)
        assert np.array_equal(r1.explained_variance_ratio, r2.explained_variance_ratio)

    def test_sign_rule_sum_positive(self):
        rng = np.random.default_rng(47)
        z = zscore_cols(rng.normal(size=(40, 4)) @ rng.normal(size=(4, 4)))
        r = pca(z)
        for j in range(4):
            s = r.loadings[:, j].sum()
            if abs(s) > 1e-12:
                assert s > 0


def build_panel_ds(names, cols, start=1993):
    series = [series_from_values(nm, start, col) for nm, col in zip(names, cols)]
    n = len(cols[0])
    return align_dataset(series, (start, start + n - 1))


class TestExternalDemandIndex:
    def test_single_country_equals_zscore(self):
        rng = np.random.default_rng(50)
        g = np.cumsum(rng.normal(0.03, 0.02, size=30)) + 10.0
        ds = build_panel_ds(["ln_gdp_a"], [g])
        idx = external_demand_index(ds, ["ln_gdp_a"])
        z = zscore(ds.get("ln_gdp_a"))
        assert np.max(np.abs(idx.values - z.values)) < 1e-10

    def test_mean_zero_and_positive_orientation(self):
        rng = np.random.default_rng(51)
        trend = np.cumsum(rng.normal(0.04, 0.01, size=32))
        cols = [trend + rng.normal(0, 0.05, size=32) + c for c in range(4)]
        names = [f"ln_gdp_{i}" for i in range(4)]
        ds = build_panel_ds(names, cols)
        idx = external_demand_index(ds, names)
        assert abs(idx.values.mean()) < 1e-10
        panel_mean = np.column_stack(cols).mean(axis=1)
        corr = np.corrcoef(idx.values, panel_mean)[0, 1]
        assert corr > 0.9, f"orientation corr {corr}"
        assert idx.method == "pc1"
        assert 0.0 < idx.explained_ratio <= 1.0

    def test_constant_column_raises(self):
        rng = np.random.default_rng(52)
        cols = [rng.normal(size=20), np.full(20, 3.0)]
        ds = build_panel_ds(["a", "b"], cols)
        with pytest.raises(ZeroVariance):
            external_demand_index(ds, ["a", "b"])


class TestMonetaryConditionsIndex:
    def make_rates(self, seed=60, n=32):
        rng = np.random.default_rng(seed)
        base = np.clip(np.cumsum(rng.normal(0, 0.4, size=n)) + 5.0, 0.5, None)
        cols = [base * s + rng.normal(0, 0.2, size=n) + c for s, c in
                [(1.0, 0.0), (1.1, 0.5), (0.9, -0.3), (0.7, 1.0), (1.3, 2.0)]]
        return build_panel_ds(list(MCI_RATE_NAMES), cols), np.column_stack(cols)

    def test_collinear_rates_ratio_one(self):
        rng = np.random.default_rng(61)
        base = rng.normal(size=25) + 6.0
        cols = [base * s + c for s, c in [(1, 0), (2, 1), (0.5, 3), (1.5, -1), (3, 2)]]
        ds = build_panel_ds(list(MCI_RATE_NAMES), cols)
        idx = monetary_conditions_index(ds)
        assert abs(idx.explained_ratio - 1.0) < 1e-10

    def test_uniform_rate_rise_raises_index_that_year(self):
        ds, panel = self.make_rates()
        base_idx = monetary_conditions_index(ds)
        n = panel.shape[0]
        for t in range(n):
            shifted = panel.copy()
            shifted[t, :] += 1.0
            ds2 = build_panel_ds(list(MCI_RATE_NAMES), list(shifted.T))
            idx2 = monetary_conditions_index(ds2)
            assert idx2.values[t] > base_idx.values[t], f"year offset {t}"

    def test_mean_zero_and_provenance(self):
        ds, _ = self.make_rates(seed=62)
        idx = monetary_conditions_index(ds)
        assert abs(idx.values.mean()) < 1e-10
        assert idx.inputs == MCI_RATE_NAMES
        assert "tighter" in idx.orientation


class TestTradeWeightedIndex:
    def make_gdp_ds(self, seed=70, n=32, start=1993):
        rng = np.random.default_rng(seed)
        cols = [np.exp(np.cumsum(rng.normal(0.03, 0.02, size=n))) * c for c in (50, 80, 120)]
        return build_panel_ds(["gdp_a", "gdp_b", "gdp_c"], cols, start=start), cols

    def test_base_year_exactly_one(self):
        ds, _ = self.make_gdp_ds()
        idx = trade_weighted_index(ds, {"gdp_a": 0.5, "gdp_b": 0.3, "gdp_c": 0.2}, 2010)
        assert idx.series.value_at(2010) == 1.0

    def test_single_country_weight_one(self):
        ds, cols = self.make_gdp_ds(seed=71)
        idx = trade_weighted_index(ds, {"gdp_b": 1.0}, 2010)
        expected = cols[1] / cols[1][2010 - 1993]
        assert np.allclose(idx.values, expected, rtol=1e-12)

    def test_weight_normalization_invariance(self):
        ds, _ = self.make_gdp_ds(seed=72)
        i1 = trade_weighted_index(ds, {"gdp_a": 0.25, "gdp_b": 0.75}, 2005)
        i2 = trade_weighted_index(ds, {"gdp_a": 1.0, "gdp_b": 3.0}, 2005)
        assert np.max(np.abs(i1.values - i2.values)) < 1e-12

    def test_missing_weight_errors(self):
        ds, _ = self.make_gdp_ds(seed=73)
        with pytest.raises(MissingWeight):
            trade_weighted_index(ds, {}, 2010)
        with pytest.raises(MissingWeight):
            trade_weighted_index(ds, {"gdp_a": -0.1, "gdp_b": 1.1}, 2010)
        with pytest.raises(MissingWeight):
            trade_weighted_index(ds, {"gdp_z": 1.0}, 2010)
        with pytest.raises(MissingWeight):
            trade_weighted_index(ds, {"gdp_a": 0.0}, 2010)

    def test_base_year_out_of_window(self):
        ds, _ = self.make_gdp_ds(seed=74)
        with pytest.raises(BaseYearOutOfWindow):
            trade_weighted_index(ds, {"gdp_a": 1.0}, 1980)

    def test_non_positive_level(self):
        vals = np.linspace(-1.0, 5.0, 20)
        ds = build_panel_ds(["gdp_a"], [vals])
        with pytest.raises(NonPositiveValue):
            trade_weighted_index(ds, {"gdp_a": 1.0}, 2000)
