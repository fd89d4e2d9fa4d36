"""World Bank WDI fetching, local CSV loading, and dataset freezing.

The fetcher keeps a one-file-per-request disk cache that is consulted before
any network call; entries carry their own checksum so corruption is detected
and silently refetched. The HTTP transport is a plain callable so offline
callers (and tests) can substitute their own. The real transport retries
transient failures with exponential backoff and spaces requests to the same
host by at least 200 ms.

Freezing writes a canonical CSV (fixed column order, 6-decimal values) whose
bytes are checksummed into a human-readable manifest, so a frozen dataset
can be committed and re-verified instead of refetched.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import threading
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import (
    EmptyResponse,
    HttpError,
    IoError,
    ParseError,
    SchemaMismatch,
)
from .series import AnnualSeries, Dataset

#: Remittance destination countries and their ISO-3 codes, in fixed order.
WDI_COUNTRIES = (
    ("Qatar", "QAT"),
    ("India", "IND"),
    ("United Arab Emirates", "ARE"),
    ("Saudi Arabia", "SAU"),
    ("Malaysia", "MYS"),
    ("United States", "USA"),
    ("Japan", "JPN"),
    ("Kuwait", "KWT"),
    ("Bahrain", "BHR"),
    ("South Korea", "KOR"),
    ("United Kingdom", "GBR"),
    ("Australia", "AUS"),
)

#: Catalog codes for the indicators the pipeline pulls from the WDI API.
WDI_INDICATORS = {
    "remittances_pct_gdp": "BX.TRF.PWKR.DT.GD.ZS",
    "gdp_growth": "NY.GDP.MKTP.KD.ZG",
    "inflation_cpi": "FP.CPI.TOTL.ZG",
    "exchange_rate_usd": "PA.NUS.FCRF",
}

#: Real GDP in constant dollars, fetched per destination country for the
#: external-demand panel.
WDI_GDP_INDICATOR = "NY.GDP.MKTP.KD"

_WDI_BASE = "https://api.worldbank.org/v2"
_CACHE_ENV = "COINTKIT_CACHE_DIR"
_HOST_SPACING_S = 0.2


@dataclass(frozen=True)
class IndicatorRequest:
    """One (country, indicator, year range) WDI query.

    Attributes
    ----------
    country_code : str
        ISO-3 country or aggregate code.
    indicator_code : str
        WDI catalog code.
    year_range : tuple
        Inclusive (first, last) calendar years.
    """

    country_code: str
    indicator_code: str
    year_range: tuple

    def __post_init__(self):
        if not self.country_code or not str(self.country_code).strip():
            raise ValueError("country_code must be a nonempty string")
        if not self.indicator_code or not str(self.indicator_code).strip():
            raise ValueError("indicator_code must be a nonempty string")
        y0, y1 = self.year_range
        if int(y1) < int(y0):
            raise ValueError(f"year_range {self.year_range} is empty")
        object.__setattr__(self, "year_range", (int(y0), int(y1)))

    def cache_key(self) -> str:
        y0, y1 = self.year_range
        raw = f"{self.country_code}_{self.indicator_code}_{y0}_{y1}"
        return raw.replace(".", "-") + ".json"

    def url(self, page: int, per_page: int = 1000) -> str:
        y0, y1 = self.year_range
        return (
            f"{_WDI_BASE}/country/{self.country_code}/indicator/"
            f"{self.indicator_code}?format=json&date={y0}:{y1}"
            f"&per_page={per_page}&page={page}"
        )


@dataclass(frozen=True)
class DataManifest:
    """Checksummed inventory of a frozen dataset.

    ``entries`` holds one (series name, source, retrieval timestamp, sha256)
    tuple per column; ``dataset_checksum`` is the sha256 of the frozen CSV
    byte stream, so the file can be re-verified without this object.
    """

    entries: tuple
    dataset_checksum: str

    def to_text(self) -> str:
        lines = [f"dataset_sha256: {self.dataset_checksum}", f"columns: {len(self.entries)}"]
        for name, source, retrieved, digest in self.entries:
            lines.append(f"series: {name}")
            lines.append(f"  source: {source}")
            lines.append(f"  retrieved: {retrieved}")
            lines.append(f"  sha256: {digest}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# HTTP transport
# ---------------------------------------------------------------------------

_host_lock = threading.Lock()
_host_last_request: dict = {}


def _space_host(url: str):
    """Keep >= 200 ms between consecutive requests to the same host."""
    host = urllib.parse.urlsplit(url).netloc
    while True:
        with _host_lock:
            last = _host_last_request.get(host, 0.0)
            wait = last + _HOST_SPACING_S - time.monotonic()
            if wait <= 0:
                _host_last_request[host] = time.monotonic()
                return
        time.sleep(wait)


def _default_http_get(url: str):
    """GET one URL; returns (status, body text). Never raises for HTTP status."""
    import requests

    _space_host(url)
    try:
        resp = requests.get(url, timeout=30)
        return resp.status_code, resp.text
    except requests.RequestException as exc:
        raise HttpError(f"transport failure for {url}: {exc}") from exc


def _request_json(http_get, url: str, retries: int, base_delay: float):
    """GET with bounded retries on 5xx/transport errors; parse the JSON body."""
    last_status, last_body = None, ""
    for attempt in range(retries):
        if attempt:
            time.sleep(base_delay * (2 ** (attempt - 1)))
        try:
            status, body = http_get(url)
        except HttpError:
            if attempt == retries - 1:
                raise
            continue
        if status == 200:
            try:
                return json.loads(body)
            except json.JSONDecodeError as exc:
                raise ParseError(f"response is not JSON: {body[:120]!r}") from exc
        last_status, last_body = status, body
        if status < 500:
            break
    raise HttpError(f"status {last_status}: {last_body[:200]}")


# ---------------------------------------------------------------------------
# Cache
# ---------------------------------------------------------------------------


def _cache_dir(cache_dir) -> Path:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get(_CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "cointkit" / "wdi"


def _rows_digest(rows) -> str:
    canon = json.dumps(rows, separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _cache_load(path: Path):
    """Rows from a cache file, or None when absent or corrupt."""
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        rows = payload["rows"]
        if payload["sha256"] != _rows_digest(rows):
            return None
        return rows
    except (OSError, ValueError, KeyError, TypeError):
        return None


def _cache_store(path: Path, rows, source: str):
    payload = {
        "source": source,
        "retrieved": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "sha256": _rows_digest(rows),
        "rows": rows,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=1), encoding="utf-8")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Fetching
# ---------------------------------------------------------------------------


def _parse_wdi_pages(http_get, req: IndicatorRequest, retries, base_delay):
    """All (year, value) pairs for a request, walking the API's pages."""
    rows = []
    page, pages = 1, 1
    while page <= pages:
        doc = _request_json(http_get, req.url(page), retries, base_delay)
        if not isinstance(doc, list) or not doc:
            raise ParseError(f"unexpected response shape: {type(doc).__name__}")
        if len(doc) < 2 or doc[1] is None:
            msg = doc[0].get("message") if isinstance(doc[0], dict) else None
            raise EmptyResponse(
                f"{req.country_code}/{req.indicator_code}: no data ({msg})"
            )
        meta, points = doc[0], doc[1]
        pages = int(meta.get("pages", 1))
        for pt in points:
            try:
                year = int(pt["date"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad observation {pt!r}") from exc
            val = pt.get("value")
            rows.append([year, None if val is None else float(val)])
        page += 1
    return rows


def _series_from_rows(rows, req: IndicatorRequest, name: str) -> AnnualSeries:
    y0, y1 = req.year_range
    values = np.full(y1 - y0 + 1, np.nan)
    for year, val in rows:
        if y0 <= year <= y1 and val is not None:
            values[year - y0] = float(val)
    if np.all(np.isnan(values)):
        raise EmptyResponse(
            f"{req.country_code}/{req.indicator_code}: no observations in "
            f"{y0}-{y1}"
        )
    return AnnualSeries(name, np.arange(y0, y1 + 1), values, "", ())


def fetch_wdi(
    req: IndicatorRequest,
    cache_dir=None,
    http_get=None,
    name: str | None = None,
    retries: int = 3,
    base_delay: float = _HOST_SPACING_S,
) -> AnnualSeries:
    """Fetch one WDI indicator series, consulting the disk cache first.

    Responses are cached one file per request under ``cache_dir`` (default
    the ``COINTKIT_CACHE_DIR`` environment variable, else
    ``~/.cache/cointkit/wdi``); a cache hit makes no network call, and a
    corrupt cache entry (checksum mismatch or unreadable) triggers a
    refetch. Cache writes are atomic.

    Parameters
    ----------
    req : IndicatorRequest
    cache_dir : path-like, optional
    http_get : callable, optional
        ``(url) -> (status, body)``; defaults to a urllib transport with
        per-host request spacing.
    name : str, optional
        Series name; defaults to ``<country>_<indicator>`` lowercased with
        dots replaced.
    retries : int
        Attempts for 5xx/transport failures, with exponential backoff.
    base_delay : float
        First backoff delay in seconds.

    Returns
    -------
    AnnualSeries
        Observations over the requested range; absent years are NaN.

    Raises
    ------
    HttpError
        Terminal HTTP failure, with status and a body excerpt.
    ParseError
        Response body is not the expected JSON shape.
    EmptyResponse
        The API reports no data, or no observation falls in range.
    """
    if name is None:
        name = f"{req.country_code}_{req.indicator_code}".replace(".", "_").lower()
    get = http_get if http_get is not None else _default_http_get
    path = _cache_dir(cache_dir) / req.cache_key()

    rows = _cache_load(path)
    if rows is None:
        rows = _parse_wdi_pages(get, req, retries, base_delay)
        _cache_store(path, rows, req.url(1))
    return _series_from_rows(rows, req, name)


def fetch_many(
    requests,
    cache_dir=None,
    http_get=None,
    max_workers: int = 4,
    retries: int = 3,
    base_delay: float = _HOST_SPACING_S,
) -> list:
    """Fetch several indicators concurrently, preserving request order.

    At most ``max_workers`` fetches run at once (default 4); each one
    follows the same cache-before-network contract as ``fetch_wdi``, and
    the first failure propagates.
    """
    requests = list(requests)
    if not requests:
        return []
    workers = max(1, min(int(max_workers), len(requests)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(
                fetch_wdi,
                r,
                cache_dir=cache_dir,
                http_get=http_get,
                retries=retries,
                base_delay=base_delay,
            )
            for r in requests
        ]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Local CSV loading
# ---------------------------------------------------------------------------


def load_csv(path, expected_columns=None) -> Dataset:
    """Load a ``year,<name>,...`` CSV into a fully observed Dataset.

    Parameters
    ----------
    path : path-like
        UTF-8 CSV with a ``year`` first column and one row per year.
    expected_columns : iterable of str, optional
        When given, the data columns must match this set exactly.

    Returns
    -------
    Dataset
        Window spans the file's first to last year; column order follows
        the file.

    Raises
    ------
    SchemaMismatch
        Missing or extra columns relative to ``expected_columns``, or a
        first column that is not ``year``.
    ParseError
        Empty file, or a non-numeric cell, reported with its line number.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{path}: empty file") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "year":
        raise SchemaMismatch(f"first column must be 'year', got {header[:1]}")
    names = header[1:]
    if expected_columns is not None:
        want = list(expected_columns)
        missing = [c for c in want if c not in names]
        extra = [c for c in names if c not in want]
        if missing or extra:
            raise SchemaMismatch(f"missing columns {missing}, extra columns {extra}")

    years = []
    columns = [[] for _ in names]
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(names) + 1:
            raise ParseError(f"line {lineno}: expected {len(names) + 1} cells, got {len(row)}")
        try:
            years.append(int(row[0]))
        except ValueError as exc:
            raise ParseError(f"line {lineno}: bad year {row[0]!r}") from exc
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if cell == "":
                columns[j].append(math.nan)
                continue
            try:
                columns[j].append(float(cell))
            except ValueError as exc:
                raise ParseError(f"line {lineno}: non-numeric {cell!r}") from exc
    if not years:
        raise ParseError(f"{path}: no data rows")

    yr = np.asarray(years, dtype=int)
    series = {
        nm: AnnualSeries(nm, yr, np.asarray(col, dtype=float), "", ())
        for nm, col in zip(names, columns)
    }
    return Dataset(series, (int(yr[0]), int(yr[-1])))


# ---------------------------------------------------------------------------
# Freezing
# ---------------------------------------------------------------------------


def _canonical_csv(ds: Dataset) -> bytes:
    names = list(ds.names())
    lines = ["year," + ",".join(names)]
    for i, year in enumerate(ds.years):
        cells = [f"{ds.get(nm).values[i]:.6f}" for nm in names]
        lines.append(f"{int(year)}," + ",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def freeze_replication(ds: Dataset, out_path, sources=None) -> DataManifest:
    """Write the canonical 6-decimal CSV and its checksum manifest.

    The CSV uses the dataset's column order and fixed formatting, so
    freezing the same dataset twice is byte-identical. The manifest is
    written next to the CSV with a ``.manifest.txt`` suffix and records a
    sha256 per column plus the sha256 of the whole CSV byte stream.

    Parameters
    ----------
    ds : Dataset
    out_path : path-like
        Destination CSV path; parent directories are created.
    sources : dict, optional
        Series name -> source description for the manifest; defaults to
        ``"local"``.

    Returns
    -------
    DataManifest

    Raises
    ------
    IoError
        When the CSV or manifest cannot be written.
    """
    sources = sources or {}
    blob = _canonical_csv(ds)
    dataset_digest = hashlib.sha256(blob).hexdigest()
    retrieved = datetime.now(timezone.utc).isoformat(timespec="seconds")
    entries = []
    for nm in ds.names():
        col = ",".join(f"{v:.6f}" for v in ds.get(nm).values)
        digest = hashlib.sha256(f"{nm}:{col}".encode("utf-8")).hexdigest()
        entries.append((nm, sources.get(nm, "local"), retrieved, digest))
    manifest = DataManifest(entries=tuple(entries), dataset_checksum=dataset_digest)

    out = Path(out_path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp = out.with_name(out.name + ".tmp")
        tmp.write_bytes(blob)
        os.replace(tmp, out)
        man_path = out.parent / (out.stem + ".manifest.txt")
        man_path.write_text(manifest.to_text(), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {out}: {exc}") from exc
    return manifest
