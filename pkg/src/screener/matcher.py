"""Normalization and greedy phrase scanning.

Scanning works on a normalized token stream, but every token keeps the
character span it came from in the original text so hits can be reported
(and highlighted) against the untouched source.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

if TYPE_CHECKING:
    from .phrase_dictionary import Dictionary, PhraseRule

SCAN_FIELDS = ("title", "abstract", "full_text")


def _is_separator(ch: str) -> bool:
    # Whitespace plus anything Unicode classes as punctuation or a separator.
    # Symbols (S*) stay inside tokens: "89%" loses the %, "p<0.05" does not split on <.
    if ch.isspace():
        return True
    return unicodedata.category(ch)[0] in ("P", "Z")


@lru_cache(maxsize=4096)
def _fold_char(ch: str) -> str:
    # Decompose first so dotted capitals fold cleanly, drop combining marks,
    # then casefold. Folded output is re-filtered because a few compatibility
    # decompositions (e.g. digit-with-full-stop) smuggle punctuation back in;
    # keeping those would break normalization idempotence.
    decomposed = unicodedata.normalize("NFKD", ch)
    kept = "".join(c for c in decomposed if unicodedata.category(c) != "Mn" and not _is_separator(c))
    return kept.casefold()


@dataclass(frozen=True)
class NormalizedDoc:
    """A document as a token stream with spans back into the original text."""

    doc_id: str
    text: str
    tokens: tuple[str, ...]
    token_spans: tuple[tuple[int, int], ...]


def normalize_text(text: str, doc_id: str = "") -> NormalizedDoc:
    """Tokenize on whitespace/punctuation, folding case and diacritics.

    Each token's span is the half-open [start, end) range of original
    characters it was built from, so spans are strictly increasing and
    non-overlapping. Runs that fold to nothing (stray combining marks)
    produce no token.
    """
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    run_start = -1
    buf: list[str] = []

    def flush(end: int) -> None:
        nonlocal run_start
        if run_start >= 0:
            word = "".join(buf)
            if word:
                tokens.append(word)
                spans.append((run_start, end))
            run_start = -1
            buf.clear()

    for i, ch in enumerate(text):
        if _is_separator(ch):
            flush(i)
        else:
            if run_start < 0:
                run_start = i
            buf.append(_fold_char(ch))
    flush(len(text))
    return NormalizedDoc(doc_id=doc_id, text=text, tokens=tuple(tokens), token_spans=tuple(spans))


def normalize_tokens(text: str) -> tuple[str, ...]:
    """Just the token stream of `normalize_text`."""
    return normalize_text(text).tokens


@dataclass(frozen=True)
class MatchHit:
    """One dictionary rule realized at one place in one document."""

    rule_id: str
    doc_id: str
    token_range: tuple[int, int]  # inclusive indices of first and last token
    char_span: tuple[int, int]  # half-open span in the original text
    matched_text: str
    expected: str
    field: str = ""  # which record field was scanned; empty for bare text


def _rules_by_first_token(dictionary: Dictionary) -> dict[str, list[PhraseRule]]:
    index: dict[str, list[PhraseRule]] = {}
    for rule in dictionary.rules:
        seen: set[str] = set()
        for alt in rule.pattern[0].alternatives:
            first = alt[0]
            if first not in seen:
                seen.add(first)
                index.setdefault(first, []).append(rule)
    return index


@lru_cache(maxsize=8)
def _cached_index(dictionary: Dictionary) -> dict[str, list[PhraseRule]]:
    return _rules_by_first_token(dictionary)


def _longest_realization(rule: PhraseRule, tokens: tuple[str, ...], start: int) -> int | None:
    """Longest token count a rule can consume at `start`, or None."""
    best: int | None = None

    def walk(slot_idx: int, pos: int) -> None:
        nonlocal best
        if slot_idx == len(rule.pattern):
            consumed = pos - start
            if best is None or consumed > best:
                best = consumed
            return
        for alt in rule.pattern[slot_idx].alternatives:
            end = pos + len(alt)
            if tokens[pos:end] == alt:
                walk(slot_idx + 1, end)

    walk(0, start)
    return best


def scan_text(dictionary: Dictionary, doc: NormalizedDoc | str, doc_id: str = "") -> list[MatchHit]:
    """Greedy left-to-right scan; longest realization wins, rule order breaks ties.

    Matched token ranges never overlap: scanning resumes after the end of
    each hit, so a document equal to one matched phrase yields exactly one hit.
    """
    if isinstance(doc, str):
        doc = normalize_text(doc, doc_id)
    index = _cached_index(dictionary)
    tokens = doc.tokens
    hits: list[MatchHit] = []
    i = 0
    n = len(tokens)
    while i < n:
        best_len = 0
        best_rule: PhraseRule | None = None
        for rule in index.get(tokens[i], ()):
            consumed = _longest_realization(rule, tokens, i)
            if consumed is not None and consumed > best_len:
                best_len = consumed
                best_rule = rule
        if best_rule is None:
            i += 1
            continue
        last = i + best_len - 1
        span = (doc.token_spans[i][0], doc.token_spans[last][1])
        hits.append(
            MatchHit(
                rule_id=best_rule.id,
                doc_id=doc.doc_id,
                token_range=(i, last),
                char_span=span,
                matched_text=doc.text[span[0] : span[1]],
                expected=best_rule.expected,
            )
        )
        i = last + 1
    return hits


@dataclass
class CorpusScanSummary:
    documents_scanned: int = 0
    documents_flagged: int = 0
    skipped: int = 0
    hits_per_rule: dict[str, int] = field(default_factory=dict)


@dataclass
class DocumentHits:
    doc_id: str
    hits: list[MatchHit]


@dataclass
class CorpusScanResult:
    documents: list[DocumentHits]
    summary: CorpusScanSummary

    @property
    def hits(self) -> list[MatchHit]:
        return [h for doc in self.documents for h in doc.hits]


def _record_field(record: object, name: str) -> object:
    if isinstance(record, Mapping):
        return record.get(name)
    return getattr(record, name, None)


def scan_corpus(
    dictionary: Dictionary,
    records: Iterable[object],
    fields: Sequence[str] = ("title", "abstract"),
) -> CorpusScanResult:
    """Scan selected text fields of each record, tolerating malformed entries.

    Records may be ArticleRecord instances or plain mappings. A record with
    no usable id, or whose requested fields are all missing or non-string,
    is skipped and tallied rather than aborting the run. Fields are scanned
    independently; hits carry the field name.
    """
    fields = tuple(fields)
    if not fields:
        raise ValueError("no fields to scan")
    unknown = [f for f in fields if f not in SCAN_FIELDS]
    if unknown:
        raise ValueError(f"unknown scan fields: {', '.join(unknown)}")

    summary = CorpusScanSummary()
    documents: list[DocumentHits] = []
    for record in records:
        doc_id = _record_field(record, "id")
        if not isinstance(doc_id, str) or not doc_id:
            summary.skipped += 1
            continue
        texts = [(f, _record_field(record, f)) for f in fields]
        usable = [(f, t) for f, t in texts if isinstance(t, str) and t]
        if not usable:
            summary.skipped += 1
            continue
        doc_hits: list[MatchHit] = []
        for fname, text in usable:
            for hit in scan_text(dictionary, normalize_text(text, doc_id)):
                doc_hits.append(
                    MatchHit(
                        rule_id=hit.rule_id,
                        doc_id=doc_id,
                        token_range=hit.token_range,
                        char_span=hit.char_span,
                        matched_text=hit.matched_text,
                        expected=hit.expected,
                        field=fname,
                    )
                )
                summary.hits_per_rule[hit.rule_id] = summary.hits_per_rule.get(hit.rule_id, 0) + 1
        summary.documents_scanned += 1
        if doc_hits:
            summary.documents_flagged += 1
        documents.append(DocumentHits(doc_id=doc_id, hits=doc_hits))
    return CorpusScanResult(documents=documents, summary=summary)
