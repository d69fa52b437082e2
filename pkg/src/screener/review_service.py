"""HTTP review service for triaging scan hits.

Serves the match queue with surrounding context, records reviewer labels,
accepts snowballed phrase proposals (candidate rules that join scans only
after promotion), runs rescans as background jobs, and exposes previously
generated report JSON byte-for-byte under /stats/*.

State survives restarts through an append-only event log plus periodic
snapshots in the store directory; the dictionary and corpus files
themselves are never modified.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from fastapi import Depends, FastAPI, HTTPException, Query, Request, Response
from pydantic import BaseModel

from .matcher import MatchHit, NormalizedDoc, normalize_text, scan_text
from .phrase_dictionary import (
    Dictionary,
    DictionaryError,
    PhraseRule,
    add_rule,
    load_dictionary,
    make_rule,
    render_pattern,
)

VERDICTS = ("true_positive", "false_positive", "unsure")

CONTEXT_TOKENS = 40
SNAPSHOT_EVERY = 100
MAX_PAGE_SIZE = 200


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class LabelRecord:
    match_id: str
    verdict: str
    reviewer: str
    note: str
    at: str
    seq: int

    def to_json(self) -> dict:
        return {
            "match_id": self.match_id,
            "verdict": self.verdict,
            "reviewer": self.reviewer,
            "note": self.note,
            "at": self.at,
            "seq": self.seq,
        }


@dataclass(frozen=True)
class QueueMatch:
    """A scan hit plus everything the review queue shows about it."""

    match_id: str
    doc_id: str
    field: str
    rule_id: str
    char_span: tuple[int, int]
    matched_text: str
    expected: str
    context: str
    context_offset: int  # char offset of context start within the field text
    journal: str

    def to_json(self, labels: list[LabelRecord]) -> dict:
        current = labels[-1].verdict if labels else None
        return {
            "match_id": self.match_id,
            "doc_id": self.doc_id,
            "field": self.field,
            "rule_id": self.rule_id,
            "char_span": list(self.char_span),
            "matched_text": self.matched_text,
            "expected": self.expected,
            "context": self.context,
            "highlight": [
                self.char_span[0] - self.context_offset,
                self.char_span[1] - self.context_offset,
            ],
            "journal": self.journal,
            "verdict": current,
            "status": current or "pending",
            "label_count": len(labels),
        }


def match_identity(doc_id: str, field_name: str, rule_id: str, char_span: tuple[int, int]) -> str:
    return f"{doc_id}|{field_name}|{rule_id}|{char_span[0]}-{char_span[1]}"


def _context_window(doc: NormalizedDoc, hit: MatchHit) -> tuple[str, int]:
    first, last = hit.token_range
    lo = max(0, first - CONTEXT_TOKENS)
    hi = min(len(doc.tokens) - 1, last + CONTEXT_TOKENS)
    start = doc.token_spans[lo][0]
    end = doc.token_spans[hi][1]
    return doc.text[start:end], start


class EventStore:
    """Append-only JSONL event log with periodic full snapshots.

    Events are the source of truth; the snapshot only shortens replay.
    A single lock serializes appends, so concurrent label posts resolve
    in server receipt order.
    """

    def __init__(self, store_dir: str | Path):
        self.dir = Path(store_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.events_path = self.dir / "events.jsonl"
        self.snapshot_path = self.dir / "snapshot.json"
        self.seq = 0
        self._lock = threading.Lock()

    def append(self, event: dict) -> dict:
        with self._lock:
            self.seq += 1
            event = {"seq": self.seq, "at": _now(), **event}
            with open(self.events_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False) + "\n")
        return event

    def load(self) -> tuple[dict | None, list[dict]]:
        """(snapshot, events newer than it); also restores the sequence."""
        snapshot = None
        if self.snapshot_path.exists():
            snapshot = json.loads(self.snapshot_path.read_text(encoding="utf-8"))
        floor = snapshot["seq"] if snapshot else 0
        events: list[dict] = []
        if self.events_path.exists():
            with open(self.events_path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    event = json.loads(line)
                    self.seq = max(self.seq, event["seq"])
                    if event["seq"] > floor:
                        events.append(event)
        self.seq = max(self.seq, floor)
        return snapshot, events

    def write_snapshot(self, payload: dict) -> None:
        payload = {"seq": self.seq, **payload}
        tmp = self.snapshot_path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
        tmp.replace(self.snapshot_path)


class ReviewState:
    def __init__(
        self,
        dictionary: Dictionary,
        corpus: list[dict],
        store: EventStore,
        fields: tuple[str, ...],
    ):
        self.lock = threading.RLock()
        self.store = store
        self.fields = fields
        self.dictionary = dictionary
        self.corpus = corpus
        self.matches: dict[str, QueueMatch] = {}
        self.labels: dict[str, list[LabelRecord]] = {}
        self.jobs: dict[str, dict] = {}
        # Rules present in the dictionary file; snapshots only carry deltas.
        self._file_rule_ids = {r.id for r in dictionary.rules}
        self._file_candidate_ids = {r.id for r in dictionary.rules if r.status == "candidate"}
        self._restore()
        self.rebuild_matches()

    # -- persistence ------------------------------------------------------

    def _restore(self) -> None:
        snapshot, events = self.store.load()
        if snapshot:
            for rule_obj in snapshot.get("added_rules", []):
                self._apply_propose(rule_obj)
            for rule_id in snapshot.get("promoted", []):
                self._apply_promote(rule_id)
            for match_id, records in snapshot.get("labels", {}).items():
                self.labels[match_id] = [LabelRecord(**r) for r in records]
        for event in events:
            kind = event.get("type")
            if kind == "label":
                record = LabelRecord(
                    match_id=event["match_id"],
                    verdict=event["verdict"],
                    reviewer=event.get("reviewer", ""),
                    note=event.get("note", ""),
                    at=event["at"],
                    seq=event["seq"],
                )
                self.labels.setdefault(record.match_id, []).append(record)
            elif kind == "propose":
                self._apply_propose(event["rule"])
            elif kind == "promote":
                self._apply_promote(event["rule_id"])

    def _apply_propose(self, rule_obj: dict) -> None:
        if self.dictionary.get(rule_obj["id"]) is not None:
            return
        rule = make_rule(
            rule_obj["pattern"],
            rule_obj["expected"],
            rule_id=rule_obj["id"],
            status=rule_obj.get("status", "candidate"),
            note=rule_obj.get("note") or None,
        )
        self.dictionary = add_rule(self.dictionary, rule)

    def _apply_promote(self, rule_id: str) -> None:
        rules = tuple(
            PhraseRule(id=r.id, pattern=r.pattern, expected=r.expected, status="confirmed", note=r.note)
            if r.id == rule_id
            else r
            for r in self.dictionary.rules
        )
        self.dictionary = Dictionary(rules=rules, source_digest=self.dictionary.source_digest)

    def _maybe_snapshot(self) -> None:
        if self.store.seq % SNAPSHOT_EVERY == 0:
            self.snapshot()

    def snapshot(self) -> None:
        file_ids = self._file_rule_ids
        added = [
            {
                "id": r.id,
                "pattern": render_pattern(r),
                "expected": r.expected,
                "status": r.status,
                "note": r.note or "",
            }
            for r in self.dictionary.rules
            if r.id not in file_ids
        ]
        promoted = [
            r.id for r in self.dictionary.rules if r.id in self._file_candidate_ids and r.status == "confirmed"
        ]
        promoted += [r["id"] for r in added if r["status"] == "confirmed"]
        self.store.write_snapshot(
            {
                "labels": {mid: [r.to_json() for r in records] for mid, records in self.labels.items()},
                "added_rules": added,
                "promoted": sorted(set(promoted)),
            }
        )

    # -- scanning ---------------------------------------------------------

    def rebuild_matches(self) -> int:
        """Scan the corpus with confirmed rules; labels are left untouched."""
        active = self.dictionary.confirmed_only()
        matches: dict[str, QueueMatch] = {}
        for record in self.corpus:
            doc_id = record.get("id") or record.get("doi") or record.get("pii")
            if not isinstance(doc_id, str) or not doc_id:
                continue
            journal = record.get("journal") or ""
            for field_name in self.fields:
                text = record.get(field_name)
                if not isinstance(text, str) or not text:
                    continue
                doc = normalize_text(text, doc_id)
                for hit in scan_text(active, doc):
                    context, offset = _context_window(doc, hit)
                    match_id = match_identity(doc_id, field_name, hit.rule_id, hit.char_span)
                    matches[match_id] = QueueMatch(
                        match_id=match_id,
                        doc_id=doc_id,
                        field=field_name,
                        rule_id=hit.rule_id,
                        char_span=hit.char_span,
                        matched_text=hit.matched_text,
                        expected=hit.expected,
                        context=context,
                        context_offset=offset,
                        journal=str(journal),
                    )
        with self.lock:
            self.matches = matches
        return len(matches)

    # -- queries ----------------------------------------------------------

    def ordered_matches(self) -> list[QueueMatch]:
        with self.lock:
            items = list(self.matches.values())
        items.sort(key=lambda m: (m.doc_id, m.field, m.char_span[0], m.rule_id))
        return items

    def orphaned_labels(self) -> list[str]:
        with self.lock:
            return [mid for mid in self.labels if mid not in self.matches]


class LabelBody(BaseModel):
    verdict: str
    reviewer: str = ""
    note: str = ""


class ProposeBody(BaseModel):
    pattern: str
    expected: str
    note: str = ""
    id: str = ""


def _load_corpus_mappings(path: str | Path) -> list[dict]:
    records: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except ValueError:
                continue
            if isinstance(obj, dict):
                records.append(obj)
    return records


def create_app(
    dictionary_path: str | Path,
    corpus_path: str | Path,
    *,
    store_dir: str | Path,
    stats_dir: str | Path | None = None,
    fields: tuple[str, ...] = ("title", "abstract"),
    token: str | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    dictionary = load_dictionary(dictionary_path)
    corpus = _load_corpus_mappings(corpus_path)
    store = EventStore(store_dir)
    state = ReviewState(dictionary, corpus, store, fields)

    app = FastAPI(title="screener review service", version="1.0")
    app.state.review = state

    def require_token(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or bad bearer token")

    auth = Depends(require_token)

    @app.get("/health")
    def health() -> dict:
        with state.lock:
            return {
                "status": "ok",
                "documents": len(state.corpus),
                "rules": len(state.dictionary),
                "matches": len(state.matches),
                "orphaned_labels": len(state.orphaned_labels()),
            }

    @app.get("/matches", dependencies=[auth])
    def list_matches(
        status: str | None = None,
        rule: str | None = None,
        journal: str | None = None,
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=MAX_PAGE_SIZE),
    ) -> dict:
        if status is not None and status not in (*VERDICTS, "pending"):
            raise HTTPException(status_code=400, detail=f"bad status filter: {status}")
        items = []
        for match in state.ordered_matches():
            labels = state.labels.get(match.match_id, [])
            payload = match.to_json(labels)
            if status is not None and payload["status"] != status:
                continue
            if rule is not None and match.rule_id != rule:
                continue
            if journal is not None and match.journal != journal:
                continue
            items.append(payload)
        total = len(items)
        start = (page - 1) * page_size
        return {
            "items": items[start : start + page_size],
            "page": page,
            "page_size": page_size,
            "total": total,
            "total_pages": max(1, -(-total // page_size)),
        }

    @app.get("/matches/{match_id}", dependencies=[auth])
    def get_match(match_id: str) -> dict:
        with state.lock:
            match = state.matches.get(match_id)
        if match is None:
            raise HTTPException(status_code=404, detail="unknown match")
        return match.to_json(state.labels.get(match_id, []))

    @app.post("/matches/{match_id}/label", dependencies=[auth])
    def label_match(match_id: str, body: LabelBody) -> dict:
        if body.verdict not in VERDICTS:
            raise HTTPException(
                status_code=400, detail=f"verdict must be one of {', '.join(VERDICTS)}"
            )
        with state.lock:
            if match_id not in state.matches:
                raise HTTPException(status_code=404, detail="unknown match")
            history = state.labels.setdefault(match_id, [])
            current = history[-1] if history else None
            if (
                current is not None
                and (current.verdict, current.reviewer, current.note)
                == (body.verdict, body.reviewer, body.note)
            ):
                return {"label": current.to_json(), "history": len(history), "idempotent": True}
            event = state.store.append(
                {
                    "type": "label",
                    "match_id": match_id,
                    "verdict": body.verdict,
                    "reviewer": body.reviewer,
                    "note": body.note,
                }
            )
            record = LabelRecord(
                match_id=match_id,
                verdict=body.verdict,
                reviewer=body.reviewer,
                note=body.note,
                at=event["at"],
                seq=event["seq"],
            )
            history.append(record)
            state._maybe_snapshot()
        return {"label": record.to_json(), "history": len(history), "idempotent": False}

    @app.get("/phrases", dependencies=[auth])
    def list_phrases(status: str | None = None) -> dict:
        with state.lock:
            rules = state.dictionary.rules
        if status is not None:
            if status not in ("confirmed", "candidate"):
                raise HTTPException(status_code=400, detail=f"bad status filter: {status}")
            rules = tuple(r for r in rules if r.status == status)
        return {
            "rules": [
                {
                    "id": r.id,
                    "pattern": render_pattern(r),
                    "expected": r.expected,
                    "status": r.status,
                    "note": r.note or "",
                }
                for r in rules
            ]
        }

    @app.post("/phrases", dependencies=[auth], status_code=201)
    def propose_phrase(body: ProposeBody) -> dict:
        with state.lock:
            rule_id = body.id.strip() or f"p{state.store.seq + 1}"
            if state.dictionary.get(rule_id) is not None:
                raise HTTPException(status_code=409, detail=f"rule id {rule_id} already exists")
            try:
                rule = make_rule(
                    body.pattern, body.expected, rule_id=rule_id, note=body.note or None
                )
            except (DictionaryError, ValueError) as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            for existing in state.dictionary.rules:
                if existing.pattern == rule.pattern and existing.expected == rule.expected:
                    raise HTTPException(
                        status_code=409, detail=f"duplicate of rule {existing.id}"
                    )
            state.dictionary = add_rule(state.dictionary, rule)
            state.store.append(
                {
                    "type": "propose",
                    "rule": {
                        "id": rule.id,
                        "pattern": render_pattern(rule),
                        "expected": rule.expected,
                        "status": rule.status,
                        "note": rule.note or "",
                    },
                }
            )
            state._maybe_snapshot()
        return {
            "id": rule.id,
            "pattern": render_pattern(rule),
            "expected": rule.expected,
            "status": rule.status,
            "note": rule.note or "",
        }

    @app.post("/phrases/{rule_id}/promote", dependencies=[auth])
    def promote_phrase(rule_id: str) -> dict:
        with state.lock:
            rule = state.dictionary.get(rule_id)
            if rule is None:
                raise HTTPException(status_code=404, detail="unknown rule")
            if rule.status == "confirmed":
                return {"id": rule_id, "status": "confirmed", "notice": "already confirmed"}
            state._apply_promote(rule_id)
            state.store.append({"type": "promote", "rule_id": rule_id})
            state._maybe_snapshot()
        return {"id": rule_id, "status": "confirmed"}

    @app.post("/rescan", dependencies=[auth], status_code=202)
    def start_rescan() -> dict:
        job_id = uuid.uuid4().hex
        with state.lock:
            before = len(state.matches)
            state.jobs[job_id] = {
                "job_id": job_id,
                "state": "running",
                "started": _now(),
                "finished": None,
                "matches_before": before,
                "matches_after": None,
            }

        def run() -> None:
            try:
                after = state.rebuild_matches()
            except Exception as exc:  # surface the failure in the job record
                with state.lock:
                    state.jobs[job_id].update(state="failed", finished=_now(), error=str(exc))
                return
            with state.lock:
                state.jobs[job_id].update(state="done", finished=_now(), matches_after=after)

        threading.Thread(target=run, name=f"rescan-{job_id[:8]}", daemon=True).start()
        return {"job_id": job_id, "state": "running"}

    @app.get("/rescan/{job_id}", dependencies=[auth])
    def rescan_status(job_id: str) -> dict:
        with state.lock:
            job = state.jobs.get(job_id)
            if job is None:
                raise HTTPException(status_code=404, detail="unknown job")
            return dict(job)

    # -- stats: serve report files byte-for-byte --------------------------

    stats_root = Path(stats_dir) if stats_dir else None

    def stats_file(relative: str) -> Response:
        if stats_root is None:
            raise HTTPException(
                status_code=404,
                detail="no stats directory configured; run the scores/timeline commands and pass --stats",
            )
        path = stats_root / relative
        if not path.is_file():
            raise HTTPException(
                status_code=404,
                detail=f"{relative} not found; generate it with the scores/timeline commands",
            )
        return Response(content=path.read_bytes(), media_type="application/json")

    @app.get("/stats/ecdf", dependencies=[auth])
    def stats_ecdf(set_name: str = Query(default="", alias="set")) -> Response:
        if not set_name:
            if stats_root is None or not (stats_root / "bands").is_dir():
                raise HTTPException(status_code=404, detail="no band files available")
            names = sorted(p.stem for p in (stats_root / "bands").glob("*.json"))
            return Response(
                content=json.dumps({"sets": names}), media_type="application/json"
            )
        if "/" in set_name or "\\" in set_name or ".." in set_name:
            raise HTTPException(status_code=400, detail="bad set name")
        return stats_file(f"bands/{set_name}.json")

    @app.get("/stats/histogram", dependencies=[auth])
    def stats_histogram() -> Response:
        return stats_file("histograms.json")

    @app.get("/stats/blocks", dependencies=[auth])
    def stats_blocks() -> Response:
        return stats_file("blocks.json")

    @app.get("/stats/durations", dependencies=[auth])
    def stats_durations() -> Response:
        return stats_file("durations.json")

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
