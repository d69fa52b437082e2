from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from screener.detector_gateway import (
    BatchResult,
    DetectorError,
    DetectorProtocolError,
    RemoteDetector,
    ScoredText,
    StubDetector,
    batch_score,
    read_scores_csv,
    score_text,
    write_scores_csv,
)


def fnv1a64(data: bytes) -> int:
    # independent copy of the hash definition for pinning stub scores
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) % 2**64
    return h


class TestStubDetector:
    def test_score_is_hash_fraction(self):
        stub = StubDetector()
        assert stub.score("aaa") == fnv1a64(b"aaa") / 2**64
        assert stub.score("aaa") == pytest.approx(0.9027822075925063)

    def test_normalization_invariance(self):
        stub = StubDetector()
        assert stub.score("Naïve  Bayes!") == stub.score("naive bayes")

    def test_spread(self):
        # vary the prefix: changes there diffuse through every later multiply
        stub = StubDetector()
        scores = [stub.score(f"{i} text number") for i in range(200)]
        assert all(0.0 <= s <= 1.0 for s in scores)
        assert len(set(scores)) == 200
        assert 0.3 < sum(scores) / len(scores) < 0.7


class TestScoreText:
    def test_result_fields(self):
        scored = score_text(StubDetector(), "one two three", "d1")
        assert scored.doc_id == "d1"
        assert scored.token_count == 3
        assert not scored.reliable

    def test_reliability_threshold(self):
        assert not score_text(StubDetector(), "w " * 49).reliable
        assert score_text(StubDetector(), "w " * 50).reliable

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            score_text(StubDetector(), "   ")

    def test_reliable_is_derived_not_stored(self):
        assert ScoredText("d", 0.5, 50).reliable
        assert not ScoredText("d", 0.5, 49).reliable


class _ScorerHandler(BaseHTTPRequestHandler):
    responses: list = []
    calls = 0
    bodies: list = []

    def do_POST(self):
        cls = type(self)
        length = int(self.headers.get("Content-Length", 0))
        cls.bodies.append(self.rfile.read(length).decode("utf-8"))
        status, payload = cls.responses[min(cls.calls, len(cls.responses) - 1)]
        cls.calls += 1
        body = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
        self.send_response(status)
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def scorer_url():
    server = HTTPServer(("127.0.0.1", 0), _ScorerHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    _ScorerHandler.calls = 0
    _ScorerHandler.bodies = []
    yield f"http://127.0.0.1:{server.server_port}/score"
    server.shutdown()


def remote(url: str, **kw) -> RemoteDetector:
    kw.setdefault("backoff", 0.0)
    return RemoteDetector(url, **kw)


class TestRemoteDetector:
    def test_posts_text_reads_configured_field(self, scorer_url):
        _ScorerHandler.responses = [(200, {"fake": 0.83, "real": 0.17})]
        assert remote(scorer_url).score("hello there") == 0.83
        assert _ScorerHandler.bodies == ["hello there"]

    def test_dotted_field_path(self, scorer_url):
        _ScorerHandler.responses = [(200, {"result": {"fake": 0.4}})]
        assert remote(scorer_url, score_field="result.fake").score("x") == 0.4

    def test_clamps_out_of_range(self, scorer_url):
        _ScorerHandler.responses = [(200, {"fake": 1.7})]
        assert remote(scorer_url).score("x") == 1.0

    def test_retries_then_succeeds(self, scorer_url):
        _ScorerHandler.responses = [(500, {}), (500, {}), (200, {"fake": 0.5})]
        assert remote(scorer_url).score("x") == 0.5
        assert _ScorerHandler.calls == 3

    def test_exhausted_retries_raise_with_doc_id(self, scorer_url):
        _ScorerHandler.responses = [(500, {})]
        with pytest.raises(DetectorError) as err:
            score_text(remote(scorer_url), "some text", "doc-7")
        assert err.value.doc_id == "doc-7"
        assert "doc-7" in str(err.value)

    @pytest.mark.parametrize(
        "payload",
        [{"real": 0.5}, {"fake": "high"}, {"fake": None}, {"fake": float("nan")}, {"fake": True}],
    )
    def test_protocol_errors_not_retried(self, scorer_url, payload):
        text = json.dumps(payload) if payload.get("fake") != float("nan") else '{"fake": NaN}'
        _ScorerHandler.responses = [(200, text.encode())]
        with pytest.raises(DetectorProtocolError):
            remote(scorer_url).score("x")
        assert _ScorerHandler.calls == 1

    def test_non_json_body_retries_then_fails(self, scorer_url):
        _ScorerHandler.responses = [(200, b"<html>not json</html>")]
        with pytest.raises(DetectorError):
            remote(scorer_url, retries=2).score("x")
        assert _ScorerHandler.calls == 2


class TestBatchScore:
    def records(self):
        return [
            {"id": "d1", "abstract": "alpha beta gamma"},
            {"id": "d2", "abstract": ""},  # skipped: no text
            {"id": "d3", "abstract": "delta epsilon"},
            {"abstract": "no id"},  # skipped
            {"id": "d4", "abstract": "zeta"},
        ]

    def test_order_preserved_and_skips_tallied(self):
        result = batch_score(StubDetector(), self.records(), max_in_flight=3)
        assert [s.doc_id for s in result.scores] == ["d1", "d3", "d4"]
        assert result.skipped == 2
        assert result.failures == []

    def test_failures_collected_not_fatal(self):
        class Flaky:
            def score(self, text: str) -> float:
                if "delta" in text:
                    raise DetectorError("boom")
                return 0.5

        result = batch_score(Flaky(), self.records())
        assert [s.doc_id for s in result.scores] == ["d1", "d4"]
        assert len(result.failures) == 1
        assert result.failures[0][0] == "d3"

    def test_progress_callback(self):
        seen = []
        batch_score(StubDetector(), self.records(), progress=seen.append)
        assert seen == [1, 2, 3]

    def test_custom_text_field(self, record_builder):
        records = [record_builder("r1", title="counterfeit consciousness", abstract="")]
        result = batch_score(StubDetector(), records, text_field="title")
        assert result.scores[0].doc_id == "r1"


class TestScoresCsv:
    def test_round_trip_with_journal(self, tmp_path):
        scores = [ScoredText("d1", 0.25, 120), ScoredText("d2", 1.0, 3)]
        path = tmp_path / "scores.csv"
        write_scores_csv(path, scores, journals={"d1": "J. One"})
        text = path.read_text()
        assert text.splitlines()[0] == "doc_id,score,token_count,reliable,journal"
        back, journals = read_scores_csv(path)
        assert back == scores
        assert journals == {"d1": "J. One"}

    def test_round_trip_without_journal(self, tmp_path):
        scores = [ScoredText("d1", 0.12345678901234567, 55)]
        path = tmp_path / "scores.csv"
        write_scores_csv(path, scores)
        back, journals = read_scores_csv(path)
        assert back == scores  # repr formatting keeps the full float
        assert journals == {}

    def test_missing_columns_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("doc_id,score\na,0.5\n")
        with pytest.raises(ValueError, match="missing columns"):
            read_scores_csv(path)
