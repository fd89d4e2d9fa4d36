"""Year-indexed series container, alignment, transforms, and imputation.

Data model
----------
:class:`AnnualSeries` is an immutable run of annual observations: strictly
increasing calendar years with step 1, one float per year. Missing values are
represented by IEEE NaN and treated everywhere as an explicit "absent" marker;
no numeric sentinel is ever used, and every operation that requires a value
raises on absence instead of propagating it.

Each transform (log, difference, shift, zscore, impute, window) appends a
:class:`TransformSpec` to ``transform_log`` and records the input series as
``parent``. Replaying the log against the root raw series reproduces the
values bit-identically; see :func:`replay_transforms`.

Fiscal-year mapping is out of scope: inputs are assumed to already carry the
ending calendar year, and the container stores only integer calendar years.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmptyOverlap,
    GapError,
    InsufficientFit,
    NonPositiveValue,
    SeriesError,
    TooShort,
    UnknownName,
    ZeroVariance,
)

_SPEC_KINDS = frozenset({"log", "difference", "shift", "zscore", "impute", "window"})


@dataclass(frozen=True)
class TransformSpec:
    """Descriptor of one applied transform.

    Parameters are stored as a sorted tuple of (name, value) pairs so the
    spec is hashable and its repr is stable.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in _SPEC_KINDS:
            raise SeriesError(f"unknown transform kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(sorted(self.params)))
        if self.kind == "difference":
            order = dict(self.params).get("order", 0)
            if not (isinstance(order, (int, np.integer)) and order >= 1):
                raise SeriesError("difference order must be an integer >= 1")
        if self.kind == "shift":
            k = dict(self.params).get("k", 0)
            if not (isinstance(k, (int, np.integer)) and k != 0):
                raise SeriesError("shift k must be a nonzero integer")

    def __getitem__(self, key):
        return dict(self.params)[key]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AnnualSeries:
    """One annual time series.

    Attributes
    ----------
    name : str
        Identifier, used as the CSV column header.
    years : ndarray of int
        Strictly increasing, consecutive calendar years.
    values : ndarray of float
        Same length as ``years``; NaN marks an absent observation.
    units : str
        Free-text units.
    transform_log : tuple of TransformSpec
        Ordered descriptors of every transform applied since the raw root.
    parent : AnnualSeries or None
        The series this one was derived from, kept for deterministic replay.
    """

    name: str
    years: np.ndarray
    values: np.ndarray
    units: str = ""
    transform_log: tuple = ()
    parent: "AnnualSeries | None" = field(default=None, repr=False)

    def __post_init__(self):
        years = np.asarray(self.years, dtype=int)
        values = np.asarray(self.values, dtype=float)
        if years.ndim != 1 or values.ndim != 1:
            raise SeriesError("years and values must be one-dimensional")
        if len(years) != len(values):
            raise SeriesError(
                f"{self.name}: years length {len(years)} != values length {len(values)}"
            )
        if len(years) == 0:
            raise SeriesError(f"{self.name}: empty series")
        steps = np.diff(years)
        if np.any(steps != 1):
            bad = years[np.flatnonzero(steps != 1)[0]]
            raise GapError(f"{self.name}: years not consecutive after {bad}")
        object.__setattr__(self, "years", _freeze(years))
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "transform_log", tuple(self.transform_log))

    def __len__(self):
        return len(self.years)

    @property
    def start(self) -> int:
        return int(self.years[0])

    @property
    def end(self) -> int:
        return int(self.years[-1])

    def value_at(self, year: int) -> float:
        if year < self.start or year > self.end:
            raise SeriesError(f"{self.name}: year {year} outside span {self.start}-{self.end}")
        return float(self.values[year - self.start])

    def observed_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def window(self, start: int, end: int) -> "AnnualSeries":
        """Trim to the inclusive year range, recording the trim in the log."""
        lo = max(start, self.start)
        hi = min(end, self.end)
        if lo > hi:
            raise EmptyOverlap(f"{self.name}: no data in window {start}-{end}")
        i, j = lo - self.start, hi - self.start + 1
        spec = TransformSpec("window", (("start", start), ("end", end)))
        return AnnualSeries(
            self.name,
            self.years[i:j],
            self.values[i:j],
            self.units,
            self.transform_log + (spec,),
            parent=self,
        )

    def with_name(self, name: str) -> "AnnualSeries":
        return replace(self, name=name)

    def root(self) -> "AnnualSeries":
        s = self
        while s.parent is not None:
            s = s.parent
        return s


def series_from_values(name, start_year, values, units="") -> AnnualSeries:
    """Build a raw series from a start year and a value sequence."""
    values = np.asarray(values, dtype=float)
    years = np.arange(start_year, start_year + len(values))
    return AnnualSeries(name, years, values, units)


def _require_observed(s: AnnualSeries, op: str):
    if not np.all(s.observed_mask()):
        year = int(s.years[~s.observed_mask()][0])
        raise SeriesError(f"{op}: {s.name} has a missing value at {year}")


def log_transform(s: AnnualSeries) -> AnnualSeries:
    """Natural log of every value.

    Raises
    ------
    NonPositiveValue
        If any value is <= 0; the message carries the offending (year, value).
    """
    _require_observed(s, "log_transform")
    bad = np.flatnonzero(s.values <= 0)
    if bad.size:
        i = bad[0]
        raise NonPositiveValue(
            f"{s.name}: non-positive value {s.values[i]} at year {int(s.years[i])}"
        )
    spec = TransformSpec("log")
    return AnnualSeries(
        f"ln_{s.name}" if not s.name.startswith("ln_") else s.name,
        s.years,
        np.log(s.values),
        f"ln({s.units})" if s.units else "",
        s.transform_log + (spec,),
        parent=s,
    )


def difference(s: AnnualSeries, order: int = 1) -> AnnualSeries:
    """Difference of the given order; the first ``order`` years are dropped."""
    if len(s) <= order:
        raise TooShort(f"{s.name}: length {len(s)} <= difference order {order}")
    _require_observed(s, "difference")
    spec = TransformSpec("difference", (("order", order),))
    return AnnualSeries(
        f"d{order}_{s.name}" if order > 1 else f"d_{s.name}",
        s.years[order:],
        np.diff(s.values, n=order),
        s.units,
        s.transform_log + (spec,),
        parent=s,
    )


def shift(s: AnnualSeries, k: int) -> AnnualSeries:
    """Lag (k>0) or lead (k<0), trimmed to the years where both sides exist.

    The value reported at year t is the original value at t-k. k=0 is
    rejected: a zero shift is always a bug at the call site.
    """
    if k == 0:
        raise SeriesError(f"{s.name}: shift k must be nonzero")
    if abs(k) >= len(s):
        raise TooShort(f"{s.name}: |k|={abs(k)} >= length {len(s)}")
    spec = TransformSpec("shift", (("k", k),))
    if k > 0:
        years, values = s.years[k:], s.values[:-k]
    else:
        years, values = s.years[:k], s.values[-k:]
    tag = f"lag{k}" if k > 0 else f"lead{-k}"
    return AnnualSeries(
        f"{s.name}_{tag}", years, values, s.units, s.transform_log + (spec,), parent=s
    )


def zscore(s: AnnualSeries) -> AnnualSeries:
    """Standardize to mean 0, sample std 1 (denominator n-1)."""
    _require_observed(s, "zscore")
    sd = float(np.std(s.values, ddof=1))
    if sd == 0.0 or not np.isfinite(sd):
        raise ZeroVariance(f"{s.name}: zero variance")
    spec = TransformSpec("zscore")
    return AnnualSeries(
        f"z_{s.name}",
        s.years,
        (s.values - np.mean(s.values)) / sd,
        "sd units",
        s.transform_log + (spec,),
        parent=s,
    )


def impute_backward_trend(
    s: AnnualSeries, fit_window: tuple, target_years: tuple, floor: float = 0.0
) -> AnnualSeries:
    """Fill early missing years by backward extrapolation of a fitted line.

    A least-squares line is fit on ``fit_window`` (inclusive year range,
    must be fully observed, at least 3 points) and evaluated at
    ``target_years``, which must precede the fit window. Extrapolated values
    are clamped at ``floor``. Observed years are never touched; the imputed
    years are flagged in the transform log.

    The floor default of 0 reflects the rate series this was built for:
    negative extrapolated interest rates are not meaningful.
    """
    f0, f1 = int(fit_window[0]), int(fit_window[1])
    t0, t1 = int(target_years[0]), int(target_years[1])
    if t1 >= f0:
        raise SeriesError(f"{s.name}: target years {t0}-{t1} must precede fit window {f0}-{f1}")
    if f0 < s.start or f1 > s.end:
        raise InsufficientFit(f"{s.name}: fit window {f0}-{f1} outside span")
    fit_years = np.arange(f0, f1 + 1)
    fit_vals = s.values[f0 - s.start : f1 - s.start + 1]
    if len(fit_years) < 3:
        raise InsufficientFit(f"{s.name}: fit window has {len(fit_years)} < 3 points")
    if np.any(np.isnan(fit_vals)):
        raise InsufficientFit(f"{s.name}: fit window {f0}-{f1} has missing values")

    slope, intercept = np.polyfit(fit_years.astype(float), fit_vals, 1)

    new_start = min(t0, s.start)
    years = np.arange(new_start, s.end + 1)
    values = np.full(len(years), np.nan)
    values[s.start - new_start :] = s.values
    imputed = []
    for y in range(t0, t1 + 1):
        i = y - new_start
        if np.isnan(values[i]):
            values[i] = max(floor, slope * y + intercept)
            imputed.append(y)
    spec = TransformSpec(
        "impute",
        (
            ("fit_start", f0),
            ("fit_end", f1),
            ("target_start", t0),
            ("target_end", t1),
            ("floor", float(floor)),
        ),
    )
    return AnnualSeries(s.name, years, values, s.units, s.transform_log + (spec,), parent=s)


def _apply_spec(s: AnnualSeries, spec: TransformSpec) -> AnnualSeries:
    if spec.kind == "log":
        return log_transform(s)
    if spec.kind == "difference":
        return difference(s, spec["order"])
    if spec.kind == "shift":
        return shift(s, spec["k"])
    if spec.kind == "zscore":
        return zscore(s)
    if spec.kind == "window":
        return s.window(spec["start"], spec["end"])
    if spec.kind == "impute":
        return impute_backward_trend(
            s,
            (spec["fit_start"], spec["fit_end"]),
            (spec["target_start"], spec["target_end"]),
            spec["floor"],
        )
    raise SeriesError(f"unknown transform kind {spec.kind!r}")


def replay_transforms(s: AnnualSeries) -> AnnualSeries:
    """Reapply ``s.transform_log`` to the raw root; bit-identical to ``s``."""
    out = s.root()
    for spec in s.transform_log:
        out = _apply_spec(out, spec)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """A set of fully observed series over a common inclusive year window."""

    series: dict
    window_range: tuple

    def __post_init__(self):
        start, end = self.window_range
        for name, s in self.series.items():
            if s.start != start or s.end != end:
                raise SeriesError(f"{name}: span {s.start}-{s.end} != window {start}-{end}")
            if not np.all(s.observed_mask()):
                year = int(s.years[~s.observed_mask()][0])
                raise GapError(f"{name}: missing value at {year} inside dataset")

    @property
    def start(self) -> int:
        return int(self.window_range[0])

    @property
    def end(self) -> int:
        return int(self.window_range[1])

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start, self.end + 1)

    @property
    def n_obs(self) -> int:
        return self.end - self.start + 1

    def names(self):
        return list(self.series)

    def __contains__(self, name):
        return name in self.series

    def get(self, name: str) -> AnnualSeries:
        try:
            return self.series[name]
        except KeyError:
            raise UnknownName(f"no series named {name!r}; have {sorted(self.series)}") from None

    def frame(self, names) -> np.ndarray:
        """Column-stacked values for the named series, in the given order."""
        return np.column_stack([self.get(n).values for n in names])

    def with_series(self, s: AnnualSeries) -> "Dataset":
        """A new dataset with one series added or replaced."""
        new = dict(self.series)
        new[s.name] = s
        return Dataset(new, self.window_range)


def align_dataset(series_list, window: tuple) -> Dataset:
    """Trim every series to the window and assemble a Dataset.

    Missing coverage is reported, never silently filled: any (name, year)
    hole inside the window raises GapError listing every offending pair, so
    imputation must happen before alignment.

    Raises
    ------
    EmptyOverlap
        If some series has no observation inside the window at all.
    GapError
        If any series is missing years or values inside the window.
    """
    start, end = int(window[0]), int(window[1])
    if end < start:
        raise SeriesError(f"window end {end} before start {start}")
    gaps = []
    trimmed = {}
    for s in series_list:
        if s.end < start or s.start > end:
            raise EmptyOverlap(f"{s.name}: span {s.start}-{s.end} misses window {start}-{end}")
        t = s.window(start, end)
        for y in range(start, end + 1):
            if y < t.start or y > t.end or np.isnan(t.values[y - t.start]):
                gaps.append((s.name, y))
        if s.name in trimmed:
            raise SeriesError(f"duplicate series name {s.name!r}")
        trimmed[s.name] = t
    if gaps:
        raise GapError(f"missing values in window: {gaps}")
    return Dataset(trimmed, (start, end))
