from __future__ import annotations

import json
import threading
from datetime import date
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, settings, strategies as st

from screener.corpus_ingest import (
    ArticleRecord,
    FetchStats,
    RemoteEndpoint,
    RemoteFetchError,
    fetch_remote,
    filter_full_length,
    parse_corpus,
    record_to_mapping,
    write_corpus,
)


def line(**overrides) -> str:
    base = {
        "id": "a1",
        "doi": "10.1016/J.TEST.2021.1",
        "pii": "S01",
        "title": "A title",
        "abstract": "An abstract",
        "full_text": "",
        "submitted": "2020-01-01",
        "revised": "2020-02-01",
        "accepted": "2020-03-01",
        "pub_type": "full_length",
        "countries": ["CN", "SA"],
        "journal": "J. Tests",
        "volume": "77",
    }
    base.update(overrides)
    return json.dumps(base)


class TestParseCorpus:
    def test_happy_path(self):
        records, report = parse_corpus(line())
        assert report.accepted_count == 1 and report.rejected == 0
        r = records[0]
        assert r.id == "a1"
        assert r.doi == "10.1016/j.test.2021.1"  # lowercased
        assert r.submitted == date(2020, 1, 1)
        assert r.revised == date(2020, 2, 1)
        assert r.countries == ("CN", "SA")
        assert r.assessment_duration() == 60

    def test_id_falls_back_to_doi_then_pii(self):
        records, _ = parse_corpus(line(id=""))
        assert records[0].id == "10.1016/j.test.2021.1"
        records, _ = parse_corpus(line(id="", doi=""))
        assert records[0].id == "S01"

    def test_tally_invariant_on_mixed_input(self):
        text = "\n".join(
            [
                line(),
                "not json at all {",
                line(id="a2", accepted=None),
                line(id="a3", submitted="2020-05-09", revised=None, accepted="2020-05-02"),
                json.dumps({"title": "no identifiers", "submitted": "2020-01-01", "accepted": "2020-02-01"}),
                "",
                line(id="a4", revised=None),
            ]
        )
        records, report = parse_corpus(text)
        assert report.total == 6  # blank line not counted
        assert report.accepted_count == 2
        assert report.dropped_missing_acceptance == 1
        assert report.rejected == 3
        assert report.total == report.accepted_count + report.dropped_missing_acceptance + report.rejected
        assert report.assumed_no_revision == 1
        assert [r.id for r in records] == ["a1", "a4"]
        assert records[1].revised is None

    def test_reject_reasons_carry_line_numbers(self):
        _, report = parse_corpus(line() + "\n" + line(submitted="not-a-date"))
        assert len(report.reject_reasons) == 1
        assert report.reject_reasons[0].startswith("line 2:")
        assert "submitted" in report.reject_reasons[0]

    def test_date_order_violation_rejected(self):
        _, report = parse_corpus(line(submitted="2020-06-01", revised="2020-05-01"))
        assert report.rejected == 1
        assert "submitted <= revised <= accepted" in report.reject_reasons[0]

    def test_missing_submitted_rejected(self):
        _, report = parse_corpus(line(submitted=None))
        assert report.rejected == 1

    def test_missing_countries_tally(self):
        records, report = parse_corpus(line(countries=[]))
        assert report.missing_countries == 1
        assert records[0].countries == ()

    def test_unknown_pub_type_maps_to_other(self):
        records, _ = parse_corpus(line(pub_type="letter"))
        assert records[0].pub_type == "other"

    def test_filter_full_length(self):
        records, report = parse_corpus(
            line() + "\n" + line(id="a2", pub_type="review") + "\n" + line(id="a3", pub_type="erratum")
        )
        kept = filter_full_length(records, report)
        assert [r.id for r in kept] == ["a1"]
        assert report.filtered_by_type == 2


class TestRecordInvariants:
    def test_date_order_enforced_in_constructor(self):
        with pytest.raises(ValueError):
            ArticleRecord(
                id="x",
                title="t",
                submitted=date(2020, 5, 1),
                accepted=date(2020, 4, 1),
            )

    def test_revision_must_sit_between(self):
        with pytest.raises(ValueError):
            ArticleRecord(
                id="x",
                title="t",
                submitted=date(2020, 1, 1),
                revised=date(2020, 6, 1),
                accepted=date(2020, 3, 1),
            )

    def test_round_trip(self, tmp_path):
        records, _ = parse_corpus(line() + "\n" + line(id="a2", revised=None, countries=[]))
        path = tmp_path / "corpus.jsonl"
        write_corpus(path, records)
        back, report = parse_corpus(path.read_text())
        assert back == records
        assert report.rejected == 0

    dates = st.dates(min_value=date(2015, 1, 1), max_value=date(2023, 1, 1))

    @given(st.tuples(dates, dates, dates))
    @settings(max_examples=200, deadline=None)
    def test_constructor_matches_ordering_predicate(self, triple):
        s, r, a = triple
        valid = s <= r <= a
        try:
            ArticleRecord(id="x", title="t", submitted=s, revised=r, accepted=a)
            assert valid
        except ValueError:
            assert not valid


class _PagedHandler(BaseHTTPRequestHandler):
    pages: list[dict] = []
    failures_before_success = 0
    attempts = 0

    def do_GET(self):
        cls = type(self)
        cls.attempts += 1
        if cls.attempts <= cls.failures_before_success:
            self.send_response(500)
            self.end_headers()
            return
        from urllib.parse import parse_qs, urlparse

        query = parse_qs(urlparse(self.path).query)
        cursor = int(query.get("cursor", ["0"])[0])
        payload = cls.pages[cursor] if cursor < len(cls.pages) else {"items": []}
        body = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):  # keep test output quiet
        pass


@pytest.fixture
def paged_server():
    server = HTTPServer(("127.0.0.1", 0), _PagedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/api"
    server.shutdown()


def endpoint(url: str, **overrides) -> RemoteEndpoint:
    settings = dict(
        base_url=url,
        records_path=("items",),
        cursor_path=("next_cursor",),
        cursor_param="cursor",
        retries=3,
        backoff=0.0,
        timeout=5.0,
    )
    settings.update(overrides)
    return RemoteEndpoint(**settings)


class TestFetchRemote:
    def test_paginates_until_cursor_missing(self, paged_server):
        _PagedHandler.pages = [
            {"items": [{"id": "a"}, {"id": "b"}], "next_cursor": 1},
            {"items": [{"id": "c"}]},
        ]
        _PagedHandler.failures_before_success = 0
        _PagedHandler.attempts = 0
        stats = FetchStats()
        got = list(fetch_remote(endpoint(paged_server), stats=stats))
        assert [r["id"] for r in got] == ["a", "b", "c"]
        assert stats.pages == 2 and stats.records == 3

    def test_retries_transient_failures(self, paged_server):
        _PagedHandler.pages = [{"items": [{"id": "a"}]}]
        _PagedHandler.failures_before_success = 2
        _PagedHandler.attempts = 0
        got = list(fetch_remote(endpoint(paged_server)))
        assert [r["id"] for r in got] == ["a"]
        assert _PagedHandler.attempts == 3

    def test_gives_up_after_retries_with_progress(self, paged_server):
        _PagedHandler.pages = [
            {"items": [{"id": "a"}], "next_cursor": 1},
            {"items": [{"id": "b"}]},
        ]
        _PagedHandler.failures_before_success = 0
        _PagedHandler.attempts = 0

        def fail_second_page():
            items = fetch_remote(endpoint(paged_server, retries=1))
            collected = [next(items)]
            _PagedHandler.failures_before_success = 99
            collected.extend(items)
            return collected

        with pytest.raises(RemoteFetchError) as err:
            fail_second_page()
        assert err.value.delivered == 1
        assert err.value.page == 2

    def test_malformed_page_skipped(self, paged_server):
        _PagedHandler.pages = [{"items": "oops", "next_cursor": 1}]
        _PagedHandler.failures_before_success = 0
        _PagedHandler.attempts = 0
        stats = FetchStats()
        assert list(fetch_remote(endpoint(paged_server), stats=stats)) == []
        assert stats.pages_skipped == 1

    def test_endpoint_config_file(self, tmp_path):
        config = tmp_path / "endpoint.json"
        config.write_text(json.dumps({"base_url": "http://x/api", "records_path": ["r", "items"]}))
        ep = RemoteEndpoint.from_file(config)
        assert ep.records_path == ("r", "items")
        config.write_text(json.dumps({"base_url": "http://x", "bogus": 1}))
        with pytest.raises(ValueError, match="bogus"):
            RemoteEndpoint.from_file(config)
