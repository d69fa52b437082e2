"""Corpus ingestion: JSON Lines article records and remote harvesting.

One JSON object per line with fields id, doi, pii, title, abstract,
full_text, submitted, revised, accepted, pub_type, countries, journal,
volume. Dates are ISO (YYYY-MM-DD). Parsing is resilient: malformed lines
land in a rejects tally with a reason instead of aborting the run.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field, fields as dataclass_fields
from datetime import date
from pathlib import Path
from typing import IO, Iterable, Iterator

import requests

PUB_TYPES = ("full_length", "review", "editorial", "erratum", "other")

CORPUS_FIELDS = (
    "id",
    "doi",
    "pii",
    "title",
    "abstract",
    "full_text",
    "submitted",
    "revised",
    "accepted",
    "pub_type",
    "countries",
    "journal",
    "volume",
)


@dataclass(frozen=True)
class ArticleRecord:
    id: str
    title: str
    submitted: date
    accepted: date
    revised: date | None = None
    doi: str = ""
    pii: str = ""
    abstract: str = ""
    full_text: str = ""
    pub_type: str = "other"
    countries: tuple[str, ...] = ()
    journal: str = ""
    volume: str = ""

    def __post_init__(self) -> None:
        if self.pub_type not in PUB_TYPES:
            raise ValueError(f"bad pub_type: {self.pub_type!r}")
        if self.revised is not None:
            if not (self.submitted <= self.revised <= self.accepted):
                raise ValueError("dates must satisfy submitted <= revised <= accepted")
        elif self.submitted > self.accepted:
            raise ValueError("dates must satisfy submitted <= accepted")

    def assessment_duration(self) -> int:
        """Days from submission to acceptance."""
        return (self.accepted - self.submitted).days


@dataclass
class IngestReport:
    total: int = 0
    accepted_count: int = 0
    dropped_missing_acceptance: int = 0
    rejected: int = 0
    assumed_no_revision: int = 0
    missing_countries: int = 0
    filtered_by_type: int = 0
    reject_reasons: list[str] = field(default_factory=list)


def _parse_date(value: object, name: str) -> date:
    if not isinstance(value, str):
        raise ValueError(f"{name}: expected ISO date string")
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise ValueError(f"{name}: {exc}") from exc


def _as_text(value: object) -> str:
    return value if isinstance(value, str) else ""


def record_from_mapping(obj: dict, report: IngestReport | None = None) -> ArticleRecord | None:
    """Build a record, or None when acceptance is missing (dropped, not rejected).

    Raises ValueError for records that are malformed beyond use: no usable
    id, no title, missing or invalid submission date, or inconsistent dates.
    """
    doi = _as_text(obj.get("doi")).lower()
    pii = _as_text(obj.get("pii"))
    rec_id = _as_text(obj.get("id")) or doi or pii
    if not rec_id:
        raise ValueError("no id, doi, or pii")
    title = _as_text(obj.get("title"))
    if not title:
        raise ValueError("missing title")
    if obj.get("accepted") in (None, ""):
        if report is not None:
            report.dropped_missing_acceptance += 1
        return None
    submitted = _parse_date(obj.get("submitted"), "submitted")
    accepted = _parse_date(obj.get("accepted"), "accepted")
    revised_raw = obj.get("revised")
    revised = None if revised_raw in (None, "") else _parse_date(revised_raw, "revised")

    countries_raw = obj.get("countries")
    countries: tuple[str, ...] = ()
    if isinstance(countries_raw, (list, tuple)):
        countries = tuple(str(c) for c in countries_raw if c)

    pub_type = obj.get("pub_type")
    if pub_type not in PUB_TYPES:
        pub_type = "other"

    volume = obj.get("volume")
    record = ArticleRecord(
        id=rec_id,
        doi=doi,
        pii=pii,
        title=title,
        abstract=_as_text(obj.get("abstract")),
        full_text=_as_text(obj.get("full_text")),
        submitted=submitted,
        revised=revised,
        accepted=accepted,
        pub_type=pub_type,
        countries=countries,
        journal=_as_text(obj.get("journal")),
        volume=str(volume) if volume not in (None, "") else "",
    )
    # Tallies describe records that made it in, so they bump only after
    # construction has passed the date-order checks.
    if report is not None:
        if revised is None:
            report.assumed_no_revision += 1
        if not countries:
            report.missing_countries += 1
    return record


def parse_corpus(source: str | IO[str] | Iterable[str]) -> tuple[list[ArticleRecord], IngestReport]:
    """Parse JSONL from a string or line iterable.

    Invariant: total == accepted_count + dropped_missing_acceptance + rejected.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    report = IngestReport()
    records: list[ArticleRecord] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        report.total += 1
        try:
            obj = json.loads(stripped)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            record = record_from_mapping(obj, report)
        except ValueError as exc:
            report.rejected += 1
            report.reject_reasons.append(f"line {line_no}: {exc}")
            continue
        if record is not None:
            records.append(record)
            report.accepted_count += 1
    return records, report


def load_corpus(path: str | Path) -> tuple[list[ArticleRecord], IngestReport]:
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh)


def record_to_mapping(record: ArticleRecord) -> dict:
    return {
        "id": record.id,
        "doi": record.doi,
        "pii": record.pii,
        "title": record.title,
        "abstract": record.abstract,
        "full_text": record.full_text,
        "submitted": record.submitted.isoformat(),
        "revised": record.revised.isoformat() if record.revised else None,
        "accepted": record.accepted.isoformat(),
        "pub_type": record.pub_type,
        "countries": list(record.countries),
        "journal": record.journal,
        "volume": record.volume,
    }


def write_corpus(path: str | Path, records: Iterable[ArticleRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_mapping(record), ensure_ascii=False) + "\n")


def filter_full_length(
    records: Iterable[ArticleRecord], report: IngestReport | None = None
) -> list[ArticleRecord]:
    all_records = list(records)
    kept = [r for r in all_records if r.pub_type == "full_length"]
    if report is not None:
        report.filtered_by_type += len(all_records) - len(kept)
    return kept


# ---------------------------------------------------------------------------
# Remote harvesting


class RemoteFetchError(RuntimeError):
    """Raised when a page cannot be fetched; carries progress so far."""

    def __init__(self, message: str, delivered: int, page: int):
        super().__init__(f"{message} (after {delivered} records, page {page})")
        self.delivered = delivered
        self.page = page


@dataclass
class RemoteEndpoint:
    """Shape of a cursor-paginated JSON API, driven entirely by config."""

    base_url: str
    params: dict[str, str] = field(default_factory=dict)
    records_path: tuple[str, ...] = ("items",)
    cursor_path: tuple[str, ...] = ("next_cursor",)
    cursor_param: str = "cursor"
    page_size_param: str = ""
    page_size: int = 100
    bearer_token: str = ""
    max_rate: float = 0.0  # requests per second; 0 disables throttling
    retries: int = 3
    backoff: float = 0.5
    timeout: float = 30.0

    @classmethod
    def from_file(cls, path: str | Path) -> "RemoteEndpoint":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in dataclass_fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown endpoint config keys: {', '.join(sorted(unknown))}")
        if "records_path" in obj:
            obj["records_path"] = tuple(obj["records_path"])
        if "cursor_path" in obj:
            obj["cursor_path"] = tuple(obj["cursor_path"])
        return cls(**obj)


class _RateLimiter:
    """Process-wide floor on the interval between outbound requests."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._next_allowed = 0.0

    def wait(self, max_rate: float) -> None:
        if max_rate <= 0:
            return
        interval = 1.0 / max_rate
        with self._lock:
            now = time.monotonic()
            delay = self._next_allowed - now
            self._next_allowed = max(now, self._next_allowed) + interval
        if delay > 0:
            time.sleep(delay)


_rate_limiter = _RateLimiter()


def _dig(obj: object, path: tuple[str, ...]) -> object:
    for key in path:
        if not isinstance(obj, dict) or key not in obj:
            return None
        obj = obj[key]
    return obj


@dataclass
class FetchStats:
    pages: int = 0
    records: int = 0
    pages_skipped: int = 0


def fetch_remote(
    endpoint: RemoteEndpoint,
    query: dict[str, str] | None = None,
    stats: FetchStats | None = None,
    session: requests.Session | None = None,
) -> Iterator[dict]:
    """Yield raw record mappings from a cursor-paginated endpoint.

    Each page gets `retries` attempts with exponential backoff; a page
    that still fails raises RemoteFetchError carrying how many records
    were already delivered. Pages whose payload lacks a record list are
    skipped (tallied in stats), not fatal. Iteration ends on an empty
    page or a missing cursor.
    """
    own_session = session is None
    sess = session or requests.Session()
    headers = {}
    if endpoint.bearer_token:
        headers["Authorization"] = f"Bearer {endpoint.bearer_token}"
    params = dict(endpoint.params)
    if query:
        params.update(query)
    if endpoint.page_size_param:
        params[endpoint.page_size_param] = str(endpoint.page_size)

    delivered = 0
    page_no = 0
    cursor: object = None
    try:
        while True:
            page_no += 1
            page_params = dict(params)
            if cursor is not None:
                page_params[endpoint.cursor_param] = str(cursor)
            payload = None
            last_error: Exception | None = None
            for attempt in range(endpoint.retries):
                _rate_limiter.wait(endpoint.max_rate)
                try:
                    resp = sess.get(
                        endpoint.base_url,
                        params=page_params,
                        headers=headers,
                        timeout=endpoint.timeout,
                    )
                    resp.raise_for_status()
                    payload = resp.json()
                    break
                except (requests.RequestException, ValueError) as exc:
                    last_error = exc
                    if attempt + 1 < endpoint.retries:
                        time.sleep(endpoint.backoff * (2**attempt))
            if payload is None:
                raise RemoteFetchError(str(last_error), delivered, page_no)
            if stats is not None:
                stats.pages += 1
            items = _dig(payload, endpoint.records_path)
            if not isinstance(items, list):
                if stats is not None:
                    stats.pages_skipped += 1
                items = []
            for item in items:
                if isinstance(item, dict):
                    delivered += 1
                    if stats is not None:
                        stats.records += 1
                    yield item
            if not items:
                return
            cursor = _dig(payload, endpoint.cursor_path)
            if cursor in (None, ""):
                return
    finally:
        if own_session:
            sess.close()
