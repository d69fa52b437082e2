"""Gateway to machine-generated-text detectors.

A detector backend maps text to a score in [0, 1] (higher means more
likely machine-generated). The remote backend posts text to an HTTP
scorer; the stub backend hashes text so tests and offline runs get
deterministic, well-spread scores without a model. Scores on short
texts are noise, so each result carries a reliability flag that only
holds from 50 whitespace tokens upward.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import requests

from .matcher import normalize_tokens

RELIABLE_TOKEN_COUNT = 50


class DetectorError(RuntimeError):
    def __init__(self, message: str, doc_id: str = ""):
        if doc_id:
            message = f"{doc_id}: {message}"
        super().__init__(message)
        self.doc_id = doc_id


class DetectorProtocolError(DetectorError):
    """The backend answered, but not with a usable score."""


class DetectorBackend(Protocol):
    def score(self, text: str) -> float: ...


@dataclass(frozen=True)
class ScoredText:
    doc_id: str
    score: float
    token_count: int

    @property
    def reliable(self) -> bool:
        return self.token_count >= RELIABLE_TOKEN_COUNT


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 2**64


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) % _U64
    return h


class StubDetector:
    """Deterministic fake scorer: FNV-1a hash of the normalized text.

    Equal texts (after case/diacritic folding) always get equal scores,
    and scores spread roughly uniformly over [0, 1].
    """

    def score(self, text: str) -> float:
        canonical = " ".join(normalize_tokens(text))
        return _fnv1a64(canonical.encode("utf-8")) / _U64


class RemoteDetector:
    """POSTs plain text, expects JSON with a configurable score field."""

    def __init__(
        self,
        url: str,
        score_field: str = "fake",
        timeout: float = 30.0,
        retries: int = 3,
        backoff: float = 0.5,
        session: requests.Session | None = None,
    ):
        self.url = url
        self.score_field = score_field
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._session = session or requests.Session()

    def score(self, text: str) -> float:
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                resp = self._session.post(
                    self.url,
                    data=text.encode("utf-8"),
                    headers={"Content-Type": "text/plain; charset=utf-8"},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return self._extract(resp.json())
            except DetectorProtocolError:
                raise
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * (2**attempt))
        raise DetectorError(f"remote scorer failed after {self.retries} attempts: {last_error}")

    def _extract(self, payload: object) -> float:
        value = payload
        for key in self.score_field.split("."):
            if not isinstance(value, dict) or key not in value:
                raise DetectorProtocolError(f"response lacks score field {self.score_field!r}")
            value = value[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DetectorProtocolError(f"score field is not a number: {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise DetectorProtocolError(f"score is not finite: {value!r}")
        return min(1.0, max(0.0, value))


def score_text(backend: DetectorBackend, text: str, doc_id: str = "") -> ScoredText:
    """Score one text. Empty or whitespace-only text is an error."""
    if not text or not text.strip():
        raise ValueError("cannot score empty text")
    try:
        raw = backend.score(text)
    except DetectorError as exc:
        raise DetectorError(str(exc), doc_id or exc.doc_id) from exc
    score = min(1.0, max(0.0, float(raw)))
    return ScoredText(doc_id=doc_id, score=score, token_count=len(text.split()))


@dataclass
class BatchResult:
    scores: list[ScoredText]
    skipped: int
    failures: list[tuple[str, str]]  # (doc_id, reason)


def _get_field(record: object, name: str) -> object:
    if isinstance(record, Mapping):
        return record.get(name)
    return getattr(record, name, None)


def batch_score(
    backend: DetectorBackend,
    records: Iterable[object],
    text_field: str = "abstract",
    max_in_flight: int = 4,
    progress: Callable[[int], None] | None = None,
) -> BatchResult:
    """Score a record stream concurrently, preserving input order.

    Records without usable text are tallied as skipped; scorer failures
    are collected per document and never abort the batch.
    """
    jobs: list[tuple[str, str]] = []
    skipped = 0
    for record in records:
        doc_id = _get_field(record, "id")
        text = _get_field(record, text_field)
        if not isinstance(doc_id, str) or not doc_id or not isinstance(text, str) or not text.strip():
            skipped += 1
            continue
        jobs.append((doc_id, text))

    scores: list[ScoredText] = []
    failures: list[tuple[str, str]] = []

    def run(job: tuple[str, str]) -> tuple[ScoredText | None, tuple[str, str] | None]:
        doc_id, text = job
        try:
            return score_text(backend, text, doc_id), None
        except (DetectorError, ValueError) as exc:
            return None, (doc_id, str(exc))

    with ThreadPoolExecutor(max_workers=max(1, max_in_flight)) as pool:
        for done, (scored, failure) in enumerate(pool.map(run, jobs), start=1):
            if scored is not None:
                scores.append(scored)
            elif failure is not None:
                failures.append(failure)
            if progress is not None:
                progress(done)
    return BatchResult(scores=scores, skipped=skipped, failures=failures)


SCORE_CSV_COLUMNS = ("doc_id", "score", "token_count", "reliable")


def write_scores_csv(
    path: str | Path,
    scores: Sequence[ScoredText],
    journals: Mapping[str, str] | None = None,
) -> None:
    """Score dump; a journal column is appended when a mapping is given."""
    columns = list(SCORE_CSV_COLUMNS) + (["journal"] if journals is not None else [])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for s in scores:
            row = [s.doc_id, repr(s.score), str(s.token_count), "true" if s.reliable else "false"]
            if journals is not None:
                row.append(journals.get(s.doc_id, ""))
            writer.writerow(row)


def read_scores_csv(path: str | Path) -> tuple[list[ScoredText], dict[str, str]]:
    """Read a score dump back; returns scores plus any journal mapping."""
    scores: list[ScoredText] = []
    journals: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(SCORE_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"score csv missing columns: {', '.join(sorted(missing))}")
        for row in reader:
            scored = ScoredText(
                doc_id=row["doc_id"],
                score=float(row["score"]),
                token_count=int(row["token_count"]),
            )
            scores.append(scored)
            if row.get("journal"):
                journals[scored.doc_id] = row["journal"]
    return scores, journals
