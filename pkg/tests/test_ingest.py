import hashlib
import json
import threading
import time

import numpy as np
import pytest

from cointkit.errors import (
    EmptyResponse,
    GapError,
    HttpError,
    IoError,
    ParseError,
    SchemaMismatch,
)
from cointkit.ingest import (
    WDI_COUNTRIES,
    WDI_INDICATORS,
    DataManifest,
    IndicatorRequest,
    fetch_many,
    fetch_wdi,
    freeze_replication,
    load_csv,
)
from cointkit.series import Dataset, align_dataset, series_from_values


def wdi_body(points, pages=1, page=1):
    meta = {"page": page, "pages": pages, "per_page": 1000, "total": len(points)}
    return json.dumps([meta, points])


def wdi_points(year_values):
    return [
        {"date": str(y), "value": v, "countryiso3code": "NPL"}
        for y, v in year_values
    ]


class CountingGet:
    """Fake transport returning queued (status, body) responses."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def __call__(self, url):
        self.calls.append(url)
        if len(self.responses) > 1:
            return self.responses.pop(0)
        return self.responses[0]


def simple_request(y0=1993, y1=1996):
    return IndicatorRequest("NPL", "BX.TRF.PWKR.DT.GD.ZS", (y0, y1))


def simple_get(y0=1993, y1=1996):
    pts = wdi_points([(y, float(y - y0 + 1)) for y in range(y1, y0 - 1, -1)])
    return CountingGet([(200, wdi_body(pts))])


class TestIndicatorRequest:
    def test_valid(self):
        req = simple_request()
        assert req.year_range == (1993, 1996)
        assert req.cache_key().endswith(".json")
        assert "." not in req.cache_key()[:-5]

    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            IndicatorRequest("", "X", (1993, 2024))
        with pytest.raises(ValueError):
            IndicatorRequest("NPL", "  ", (1993, 2024))
        with pytest.raises(ValueError):
            IndicatorRequest("NPL", "X", (2024, 1993))

    def test_fixed_country_table(self):
        names = [n for n, _ in WDI_COUNTRIES]
        assert len(WDI_COUNTRIES) == 12
        assert "Qatar" in names and "India" in names and "Australia" in names
        assert all(len(code) == 3 for _, code in WDI_COUNTRIES)
        assert "remittances_pct_gdp" in WDI_INDICATORS


class TestFetchWdi:
    def test_fetch_parses_years_and_values(self, tmp_path):
        get = simple_get()
        s = fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        assert s.start == 1993 and s.end == 1996
        assert np.allclose(s.values, [1.0, 2.0, 3.0, 4.0])
        assert len(get.calls) == 1
        assert s.name == "npl_bx_trf_pwkr_dt_gd_zs"

    def test_null_values_become_absent(self, tmp_path):
        pts = wdi_points([(1996, 4.0), (1995, None), (1994, 2.0), (1993, 1.0)])
        get = CountingGet([(200, wdi_body(pts))])
        s = fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        assert np.isnan(s.values[2]), "null observation should be absent"
        assert s.values[3] == 4.0

    def test_second_fetch_uses_cache(self, tmp_path):
        get = simple_get()
        a = fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        b = fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        assert len(get.calls) == 1, f"cache miss made {len(get.calls)} network calls"
        assert np.array_equal(a.values, b.values)

    def test_corrupt_cache_refetches(self, tmp_path):
        get = simple_get()
        fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        cache_file = tmp_path / simple_request().cache_key()
        cache_file.write_text("{ not json", encoding="utf-8")
        fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        assert len(get.calls) == 2, "corrupt cache must refetch"
        payload = json.loads(cache_file.read_text())
        assert "sha256" in payload, "refetch should rewrite a valid entry"

    def test_tampered_rows_refetch(self, tmp_path):
        get = simple_get()
        fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        cache_file = tmp_path / simple_request().cache_key()
        payload = json.loads(cache_file.read_text())
        payload["rows"][0][1] = 99.0
        cache_file.write_text(json.dumps(payload), encoding="utf-8")
        s = fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        assert len(get.calls) == 2, "checksum mismatch must refetch"
        assert 99.0 not in s.values

    def test_env_var_cache_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("COINTKIT_CACHE_DIR", str(tmp_path / "envcache"))
        get = simple_get()
        fetch_wdi(simple_request(), http_get=get)
        assert (tmp_path / "envcache" / simple_request().cache_key()).exists()

    def test_paging(self, tmp_path):
        page1 = wdi_body(wdi_points([(1996, 4.0), (1995, 3.0)]), pages=2, page=1)
        page2 = wdi_body(wdi_points([(1994, 2.0), (1993, 1.0)]), pages=2, page=2)
        get = CountingGet([(200, page1), (200, page2)])
        s = fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)
        assert len(get.calls) == 2
        assert "page=1" in get.calls[0] and "page=2" in get.calls[1]
        assert np.allclose(s.values, [1.0, 2.0, 3.0, 4.0])

    def test_unknown_indicator_empty_response(self, tmp_path):
        body = json.dumps([{"message": [{"id": "120", "value": "bad code"}]}])
        get = CountingGet([(200, body)])
        with pytest.raises(EmptyResponse):
            fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)

    def test_all_null_empty_response(self, tmp_path):
        pts = wdi_points([(y, None) for y in range(1996, 1992, -1)])
        get = CountingGet([(200, wdi_body(pts))])
        with pytest.raises(EmptyResponse):
            fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)

    def test_http_error_carries_status_and_body(self, tmp_path):
        get = CountingGet([(404, "indicator not found")])
        with pytest.raises(HttpError, match="404.*indicator not found"):
            fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get, base_delay=0.0)
        assert len(get.calls) == 1, "client errors must not be retried"

    def test_server_errors_retried(self, tmp_path):
        ok = wdi_body(wdi_points([(1996, 4.0), (1995, 3.0), (1994, 2.0), (1993, 1.0)]))
        get = CountingGet([(500, "boom"), (503, "busy"), (200, ok)])
        s = fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get, base_delay=0.0)
        assert len(get.calls) == 3
        assert s.values[-1] == 4.0

    def test_retries_exhausted(self, tmp_path):
        get = CountingGet([(500, "boom")])
        with pytest.raises(HttpError, match="500"):
            fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get, base_delay=0.0)
        assert len(get.calls) == 3, "three attempts before giving up"

    def test_non_json_body(self, tmp_path):
        get = CountingGet([(200, "<html>downtime</html>")])
        with pytest.raises(ParseError):
            fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get)

    def test_failed_fetch_leaves_no_cache(self, tmp_path):
        get = CountingGet([(404, "nope")])
        with pytest.raises(HttpError):
            fetch_wdi(simple_request(), cache_dir=tmp_path, http_get=get, base_delay=0.0)
        assert not (tmp_path / simple_request().cache_key()).exists()


class TestFetchMany:
    def test_order_preserved(self, tmp_path):
        reqs = [IndicatorRequest(code, "NY.GDP.MKTP.KD.ZG", (1993, 1994))
                for _, code in WDI_COUNTRIES[:5]]

        def get(url):
            for _, code in WDI_COUNTRIES:
                if f"/country/{code}/" in url:
                    v = float(sum(ord(c) for c in code))
                    return 200, wdi_body(wdi_points([(1994, v + 1), (1993, v)]))
            raise AssertionError(f"unexpected url {url}")

        out = fetch_many(reqs, cache_dir=tmp_path, http_get=get)
        for req, s in zip(reqs, out):
            v = float(sum(ord(c) for c in req.country_code))
            assert s.values[0] == v, f"result order broken for {req.country_code}"

    def test_concurrency_cap(self, tmp_path):
        live = {"now": 0, "peak": 0}
        lock = threading.Lock()

        def get(url):
            with lock:
                live["now"] += 1
                live["peak"] = max(live["peak"], live["now"])
            time.sleep(0.02)
            with lock:
                live["now"] -= 1
            return 200, wdi_body(wdi_points([(1994, 2.0), (1993, 1.0)]))

        reqs = [IndicatorRequest(f"C{i:02d}", "X.Y", (1993, 1994)) for i in range(8)]
        out = fetch_many(reqs, cache_dir=tmp_path, http_get=get, max_workers=4)
        assert len(out) == 8
        assert live["peak"] <= 4, f"concurrency peaked at {live['peak']}"

    def test_empty_request_list(self, tmp_path):
        assert fetch_many([], cache_dir=tmp_path) == []


class TestLoadCsv:
    def write(self, tmp_path, text):
        p = tmp_path / "data.csv"
        p.write_text(text, encoding="utf-8")
        return p

    def test_well_formed(self, tmp_path):
        p = self.write(
            tmp_path,
            "year,rem,oil\n1993,1.5,17.0\n1994,2.0,15.8\n1995,2.5,17.2\n",
        )
        ds = load_csv(p, expected_columns=["rem", "oil"])
        assert ds.start == 1993 and ds.end == 1995
        assert list(ds.names()) == ["rem", "oil"]
        assert np.allclose(ds.get("oil").values, [17.0, 15.8, 17.2])

    def test_missing_column(self, tmp_path):
        p = self.write(tmp_path, "year,rem\n1993,1.5\n")
        with pytest.raises(SchemaMismatch, match="policy_rate"):
            load_csv(p, expected_columns=["rem", "policy_rate"])

    def test_extra_column(self, tmp_path):
        p = self.write(tmp_path, "year,rem,bonus\n1993,1.5,9.0\n")
        with pytest.raises(SchemaMismatch, match="bonus"):
            load_csv(p, expected_columns=["rem"])

    def test_non_numeric_cell_reports_line(self, tmp_path):
        p = self.write(tmp_path, "year,rem\n1993,1.5\n1994,abc\n")
        with pytest.raises(ParseError, match="line 3"):
            load_csv(p, expected_columns=["rem"])

    def test_bad_year(self, tmp_path):
        p = self.write(tmp_path, "year,rem\nMCMXCIII,1.5\n")
        with pytest.raises(ParseError, match="line 2"):
            load_csv(p)

    def test_first_column_must_be_year(self, tmp_path):
        p = self.write(tmp_path, "date,rem\n1993,1.5\n")
        with pytest.raises(SchemaMismatch, match="year"):
            load_csv(p)

    def test_empty_file(self, tmp_path):
        p = self.write(tmp_path, "")
        with pytest.raises(ParseError):
            load_csv(p)

    def test_header_only(self, tmp_path):
        p = self.write(tmp_path, "year,rem\n")
        with pytest.raises(ParseError):
            load_csv(p)

    def test_ragged_row(self, tmp_path):
        p = self.write(tmp_path, "year,rem,oil\n1993,1.5\n")
        with pytest.raises(ParseError, match="line 2"):
            load_csv(p)

    def test_missing_cell_breaks_dataset_contract(self, tmp_path):
        p = self.write(tmp_path, "year,rem\n1993,1.5\n1994,\n1995,2.5\n")
        with pytest.raises(GapError):
            load_csv(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IoError):
            load_csv(tmp_path / "absent.csv")


class TestFreezeReplication:
    def small_dataset(self, seed=0, n=6):
        rng = np.random.default_rng(seed)
        a = series_from_values("rem", 1993, rng.uniform(1.0, 25.0, size=n))
        b = series_from_values("oil", 1993, rng.uniform(10.0, 90.0, size=n))
        return align_dataset([a, b], (1993, 1993 + n - 1))

    def test_freeze_twice_identical(self, tmp_path):
        ds = self.small_dataset()
        m1 = freeze_replication(ds, tmp_path / "rep.csv")
        blob1 = (tmp_path / "rep.csv").read_bytes()
        m2 = freeze_replication(ds, tmp_path / "rep.csv")
        blob2 = (tmp_path / "rep.csv").read_bytes()
        assert m1.dataset_checksum == m2.dataset_checksum
        assert blob1 == blob2, "refreeze must be byte-identical"

    def test_checksum_matches_file_bytes(self, tmp_path):
        ds = self.small_dataset()
        man = freeze_replication(ds, tmp_path / "rep.csv")
        digest = hashlib.sha256((tmp_path / "rep.csv").read_bytes()).hexdigest()
        assert man.dataset_checksum == digest

    def test_perturbation_changes_checksum(self, tmp_path):
        vals = np.array([1.234567, 2.345678, 3.456789, 4.567891, 5.678912])
        base = align_dataset(
            [series_from_values("rem", 1993, vals)], (1993, 1997)
        )
        bumped_vals = vals.copy()
        bumped_vals[2] += 1e-6
        bumped = align_dataset(
            [series_from_values("rem", 1993, bumped_vals)], (1993, 1997)
        )
        m1 = freeze_replication(base, tmp_path / "a.csv")
        m2 = freeze_replication(bumped, tmp_path / "b.csv")
        assert m1.dataset_checksum != m2.dataset_checksum

    def test_roundtrip_within_formatting_precision(self, tmp_path):
        ds = self.small_dataset(seed=42, n=32)
        freeze_replication(ds, tmp_path / "rep.csv")
        back = load_csv(tmp_path / "rep.csv", expected_columns=list(ds.names()))
        assert back.start == ds.start and back.end == ds.end
        assert list(back.names()) == list(ds.names()), "column order must survive"
        for nm in ds.names():
            gap = np.max(np.abs(back.get(nm).values - ds.get(nm).values))
            assert gap <= 1e-6, f"{nm} roundtrip error {gap}"

    def test_manifest_contents(self, tmp_path):
        ds = self.small_dataset()
        man = freeze_replication(ds, tmp_path / "rep.csv", sources={"rem": "WDI"})
        assert [e[0] for e in man.entries] == ["rem", "oil"]
        assert man.entries[0][1] == "WDI" and man.entries[1][1] == "local"
        text = (tmp_path / "rep.manifest.txt").read_text()
        assert man.dataset_checksum in text
        assert "series: oil" in text

    def test_column_checksums_differ_per_series(self, tmp_path):
        ds = self.small_dataset()
        man = freeze_replication(ds, tmp_path / "rep.csv")
        digests = [e[3] for e in man.entries]
        assert len(set(digests)) == len(digests)

    def test_unwritable_path(self, tmp_path):
        ds = self.small_dataset()
        with pytest.raises(IoError):
            freeze_replication(ds, tmp_path)  # a directory, not a file

    def test_manifest_text_roundtrip_fields(self):
        man = DataManifest(
            entries=(("rem", "WDI", "2026-01-01T00:00:00+00:00", "ab" * 32),),
            dataset_checksum="cd" * 32,
        )
        text = man.to_text()
        assert text.startswith("dataset_sha256: " + "cd" * 32)
        assert "  sha256: " + "ab" * 32 in text
