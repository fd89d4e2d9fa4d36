"""Composite indices via principal components and trade-weighted aggregation.

All principal-component work runs on the sample correlation matrix of
z-scored inputs (sample std, denominator n-1), so eigenvalues sum to the
number of variables and an index built from PC1 scores has variance equal to
the leading eigenvalue. Scores are plain projections of the standardized
panel onto unit-norm loading vectors; they are deliberately not rescaled to
unit variance, so the index std carries the strength of the common factor.

Sign conventions: :func:`pca` orients each loading vector so its entries sum
to a positive number (first nonzero entry positive on a tie); the index
builders then re-orient PC1 against an economic anchor (cross-input mean),
so "up" always means "more demand" / "tighter money".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BaseYearOutOfWindow,
    DegenerateMatrix,
    MissingWeight,
    NonPositiveValue,
    NotStandardized,
    ZeroVariance,
)
from .series import AnnualSeries, Dataset

#: Default names of the five domestic interest-rate series used by
#: :func:`monetary_conditions_index`; override per dataset via ``rate_names``.
MCI_RATE_NAMES = (
    "policy_rate",
    "interbank_rate",
    "tbill_rate",
    "deposit_rate",
    "lending_rate",
)

_STD_TOL = 1e-6


@dataclass(frozen=True)
class PCAResult:
    """Full eigendecomposition of a standardized panel.

    Attributes
    ----------
    input_names : tuple of str
        Variable names, one per column of the input matrix.
    loadings : ndarray, shape (variables, components)
        Orthonormal loading vectors, one column per component, ordered by
        decreasing eigenvalue and sign-oriented (entry sum positive).
    scores : ndarray, shape (years, components)
        Projections of the standardized matrix onto the loadings.
    explained_variance_ratio : ndarray
        Share of total variance per component; nonincreasing, sums to 1.
    """

    input_names: tuple
    loadings: np.ndarray
    scores: np.ndarray
    explained_variance_ratio: np.ndarray


@dataclass(frozen=True)
class IndexSeries:
    """An AnnualSeries plus the provenance of how it was built.

    Attributes
    ----------
    series : AnnualSeries
        The index values, one per year.
    inputs : tuple of str
        Names of the series the index was computed from.
    method : str
        Construction method ("pc1" or "weighted geometric mean").
    orientation : str
        Human-readable statement of the sign/base convention applied.
    explained_ratio : float or None
        Variance share of PC1 for PCA-based indices, None otherwise.
    """

    series: AnnualSeries
    inputs: tuple
    method: str
    orientation: str
    explained_ratio: float | None = None

    @property
    def name(self) -> str:
        return self.series.name

    @property
    def years(self) -> np.ndarray:
        return self.series.years

    @property
    def values(self) -> np.ndarray:
        return self.series.values


def pca(standardized_matrix, names=None) -> PCAResult:
    """Eigendecomposition of the sample correlation matrix of a z-scored panel.

    Parameters
    ----------
    standardized_matrix : ndarray, shape (years, variables)
        Each column must already have mean 0 and sample std 1 (denominator
        n-1); this is checked, not silently fixed.
    names : sequence of str, optional
        Variable names; defaults to x1..xp.

    Returns
    -------
    PCAResult
        All components retained, ordered by decreasing eigenvalue; each
        loading vector is oriented so the sum of its entries is positive
        (tie: the first nonzero entry is made positive).

    Raises
    ------
    NotStandardized
        If any column has a missing entry, |mean| > 1e-6, or sample std
        differing from 1 by more than 1e-6.
    DegenerateMatrix
        If the matrix is empty, has fewer than two rows, or the correlation
        matrix has rank 0.
    """
    Z = np.asarray(standardized_matrix, dtype=float)
    if Z.ndim != 2 or Z.shape[0] == 0 or Z.shape[1] == 0:
        raise DegenerateMatrix("input must be a nonempty years-by-variables matrix")
    n, p = Z.shape
    if names is None:
        names = tuple(f"x{j + 1}" for j in range(p))
    names = tuple(names)
    if len(names) != p:
        raise DegenerateMatrix(f"{len(names)} names for {p} columns")
    if n < 2:
        raise DegenerateMatrix("need at least two rows to form a correlation matrix")
    if np.isnan(Z).any():
        raise NotStandardized("matrix has missing entries")
    mean = Z.mean(axis=0)
    std = Z.std(axis=0, ddof=1)
    bad = np.flatnonzero((np.abs(mean) > _STD_TOL) | (np.abs(std - 1.0) > _STD_TOL))
    if bad.size:
        j = int(bad[0])
        raise NotStandardized(
            f"column {names[j]!r} has mean {mean[j]:.3g}, std {std[j]:.3g}; z-score inputs first"
        )

    corr = Z.T @ Z / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(corr)
    order = np.argsort(-eigvals, kind="stable")
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    total = float(eigvals.sum())
    if total <= 0.0:
        raise DegenerateMatrix("correlation matrix has rank 0")

    for j in range(p):
        s = float(eigvecs[:, j].sum())
        if abs(s) > 1e-12:
            if s < 0.0:
                eigvecs[:, j] = -eigvecs[:, j]
        else:
            nz = np.flatnonzero(np.abs(eigvecs[:, j]) > 1e-12)
            if nz.size and eigvecs[nz[0], j] < 0.0:
                eigvecs[:, j] = -eigvecs[:, j]

    return PCAResult(
        input_names=names,
        loadings=eigvecs,
        scores=Z @ eigvecs,
        explained_variance_ratio=eigvals / total,
    )


def _standardize_panel(ds: Dataset, names) -> np.ndarray:
    panel = ds.frame(names)
    std = panel.std(axis=0, ddof=1)
    flat = np.flatnonzero(std == 0.0)
    if flat.size:
        raise ZeroVariance(f"series {names[flat[0]]!r} is constant over the window")
    return (panel - panel.mean(axis=0)) / std


def _pc1_index(ds: Dataset, names, index_name, units) -> tuple:
    """PC1 scores of the standardized panel, oriented to track the raw mean."""
    names = tuple(names)
    panel = ds.frame(names)
    result = pca(_standardize_panel(ds, names), names)
    score = result.scores[:, 0].copy()
    anchor = panel.mean(axis=1)
    cov = float(((score - score.mean()) * (anchor - anchor.mean())).sum())
    if cov < 0.0:
        score = -score
    series = AnnualSeries(index_name, ds.years, score, units)
    return series, result


def external_demand_index(ds: Dataset, countries, name: str = "ext_demand") -> IndexSeries:
    """First principal component of a standardized ln-GDP panel.

    Parameters
    ----------
    ds : Dataset
        Must hold one ln-GDP series per entry of ``countries`` over the
        whole window.
    countries : sequence of str
        Names of the ln-GDP series to combine.
    name : str
        Name for the output series.

    Returns
    -------
    IndexSeries
        Sample mean 0; signed so the index correlates positively with the
        cross-country mean of ln-GDP.
    """
    series, result = _pc1_index(ds, countries, name, "index (sd units)")
    return IndexSeries(
        series=series,
        inputs=tuple(countries),
        method="pc1",
        orientation="positive correlation with cross-country mean ln-GDP",
        explained_ratio=float(result.explained_variance_ratio[0]),
    )


def monetary_conditions_index(
    ds: Dataset, rate_names=MCI_RATE_NAMES, name: str = "mci"
) -> IndexSeries:
    """First principal component of five standardized domestic interest rates.

    Oriented so a year in which rates are uniformly higher scores higher
    ("tighter"). The variance share of PC1 is reported as
    ``explained_ratio``.
    """
    series, result = _pc1_index(ds, rate_names, name, "index (sd units)")
    return IndexSeries(
        series=series,
        inputs=tuple(rate_names),
        method="pc1",
        orientation="higher index = higher rates (tighter)",
        explained_ratio=float(result.explained_variance_ratio[0]),
    )


def trade_weighted_index(
    ds: Dataset, weights, base_year: int, name: str = "trade_weighted"
) -> IndexSeries:
    """Weighted geometric mean of GDP relatives, 1.0 at the base year.

    Parameters
    ----------
    ds : Dataset
        Holds one positive-valued GDP series per weight key.
    weights : mapping of str to float
        Nonnegative weights; normalized to sum to 1 internally.
    base_year : int
        Year at which the index equals exactly 1.0; must lie in the window.
    name : str
        Name for the output series.

    Raises
    ------
    MissingWeight
        If ``weights`` is empty, any weight is negative, the weights sum to
        zero, or a weighted series is absent from the dataset.
    BaseYearOutOfWindow
        If ``base_year`` falls outside the dataset window.
    NonPositiveValue
        If any weighted series has a value <= 0 (the geometric mean needs
        strictly positive levels).
    """
    if not weights:
        raise MissingWeight("empty weight mapping")
    for key, w in weights.items():
        if w < 0.0:
            raise MissingWeight(f"negative weight {w} for {key!r}")
        if key not in ds:
            raise MissingWeight(f"weighted series {key!r} not in dataset")
    total = float(sum(weights.values()))
    if total <= 0.0:
        raise MissingWeight("weights sum to zero")
    if base_year < ds.start or base_year > ds.end:
        raise BaseYearOutOfWindow(f"base year {base_year} outside window {ds.start}-{ds.end}")

    log_index = np.zeros(ds.n_obs)
    for key, w in weights.items():
        s = ds.get(key)
        if np.any(s.values <= 0.0):
            y = int(s.years[np.flatnonzero(s.values <= 0.0)[0]])
            raise NonPositiveValue(f"{key}: non-positive value at {y}")
        log_rel = np.log(s.values) - np.log(s.value_at(base_year))
        log_index += (w / total) * log_rel

    series = AnnualSeries(name, ds.years, np.exp(log_index), f"relative to {base_year}")
    return IndexSeries(
        series=series,
        inputs=tuple(weights),
        method="weighted geometric mean",
        orientation=f"base year {base_year} = 1.0",
        explained_ratio=None,
    )
