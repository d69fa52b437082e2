"""Phrase dictionary: rule model, file format, and search-query export.

File format, one rule per non-blank non-comment line:

    (fake | counterfeit) neural organization -> artificial neural network

Parenthesized groups are slots with `|`-separated alternatives; bare words
are single-alternative slots. Optional trailing tags: `@candidate` or
`@confirmed` (status, default confirmed), `@id=...`, and `@note=...` which
consumes the rest of the line. `#` starts a comment line.
"""

from __future__ import annotations

import hashlib
import itertools
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal

from .matcher import normalize_tokens

RuleStatus = Literal["confirmed", "candidate"]

BUNDLED_DICTIONARY = "curated.dict"
BUNDLED_THESAURUS = "curated.thesaurus"

# Cross products beyond this are almost certainly a data-entry mistake.
EXPORT_PHRASE_CAP = 256


class DictionaryError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class Slot:
    """One position in a pattern; matches any one of its alternatives.

    Every alternative is a non-empty sequence of normalized tokens, so a
    single slot can consume several document tokens.
    """

    alternatives: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.alternatives:
            raise ValueError("slot needs at least one alternative")
        for alt in self.alternatives:
            if not alt:
                raise ValueError("empty alternative")
            for token in alt:
                if normalize_tokens(token) != (token,):
                    raise ValueError(f"alternative token not normalized: {token!r}")


@dataclass(frozen=True)
class PhraseRule:
    id: str
    pattern: tuple[Slot, ...]
    expected: str
    status: RuleStatus = "confirmed"
    note: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("rule id must be non-empty")
        if len(self.pattern) < 2:
            raise ValueError(f"rule {self.id}: pattern needs at least two slots")
        if not self.expected:
            raise ValueError(f"rule {self.id}: expected wording must be non-empty")
        if self.status not in ("confirmed", "candidate"):
            raise ValueError(f"rule {self.id}: bad status {self.status!r}")

    def phrase_count(self) -> int:
        count = 1
        for slot in self.pattern:
            count *= len(slot.alternatives)
        return count


@dataclass(frozen=True)
class Dictionary:
    rules: tuple[PhraseRule, ...]
    source_digest: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for rule in self.rules:
            if rule.id in seen:
                raise DictionaryError(f"duplicate rule id: {rule.id}")
            seen.add(rule.id)

    def __len__(self) -> int:
        return len(self.rules)

    def get(self, rule_id: str) -> PhraseRule | None:
        for rule in self.rules:
            if rule.id == rule_id:
                return rule
        return None

    def confirmed_only(self) -> "Dictionary":
        """Rules that take part in scans; candidates wait for promotion."""
        return Dictionary(
            rules=tuple(r for r in self.rules if r.status == "confirmed"),
            source_digest=self.source_digest,
        )


def parse_pattern(src: str, line_no: int | None = None) -> tuple[Slot, ...]:
    slots: list[Slot] = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
        elif ch == "(":
            close = src.find(")", i)
            if close < 0:
                raise DictionaryError("unbalanced parenthesis", line_no)
            slots.append(_slot_from_alternatives(src[i + 1 : close].split("|"), line_no))
            i = close + 1
        elif ch == ")":
            raise DictionaryError("unbalanced parenthesis", line_no)
        else:
            j = i
            while j < n and not src[j].isspace() and src[j] not in "()":
                j += 1
            slots.append(_slot_from_alternatives([src[i:j]], line_no))
            i = j
    if len(slots) < 2:
        raise DictionaryError("pattern needs at least two slots", line_no)
    return tuple(slots)


def _slot_from_alternatives(raw: list[str], line_no: int | None) -> Slot:
    alternatives: list[tuple[str, ...]] = []
    for alt in raw:
        tokens = normalize_tokens(alt)
        if not tokens:
            raise DictionaryError(f"empty alternative in {'|'.join(raw)!r}", line_no)
        alternatives.append(tokens)
    try:
        return Slot(alternatives=tuple(alternatives))
    except ValueError as exc:
        raise DictionaryError(str(exc), line_no) from exc


_TAG_START = re.compile(r"\s@(?=candidate\b|confirmed\b|id=|note=)")


def _parse_rule_line(line: str, line_no: int) -> PhraseRule:
    parts = line.split("->")
    if len(parts) != 2:
        raise DictionaryError("expected exactly one '->' separator", line_no)
    pattern_src, rhs = parts

    status: RuleStatus = "confirmed"
    rule_id = f"r{line_no}"
    note: str | None = None
    m = _TAG_START.search(rhs)
    expected = (rhs[: m.start()] if m else rhs).strip()
    tag_src = rhs[m.start() :].strip() if m else ""
    while tag_src:
        if tag_src.startswith("@note="):
            note = tag_src[len("@note=") :].strip()
            tag_src = ""
        elif tag_src.startswith("@candidate"):
            status = "candidate"
            tag_src = tag_src[len("@candidate") :].strip()
        elif tag_src.startswith("@confirmed"):
            status = "confirmed"
            tag_src = tag_src[len("@confirmed") :].strip()
        elif tag_src.startswith("@id="):
            pieces = tag_src[len("@id=") :].split(maxsplit=1)
            if not pieces:
                raise DictionaryError("empty @id tag", line_no)
            rule_id = pieces[0]
            tag_src = pieces[1] if len(pieces) > 1 else ""
        else:
            raise DictionaryError(f"unknown tag near {tag_src.split()[0]!r}", line_no)

    if not expected:
        raise DictionaryError("missing expected wording", line_no)
    for token in expected.split():
        if token.startswith("@"):
            raise DictionaryError(f"unknown tag near {token!r}", line_no)
    try:
        return PhraseRule(
            id=rule_id,
            pattern=parse_pattern(pattern_src, line_no),
            expected=expected,
            status=status,
            note=note,
        )
    except ValueError as exc:
        if isinstance(exc, DictionaryError):
            raise
        raise DictionaryError(str(exc), line_no) from exc


def parse_dictionary(text: str) -> Dictionary:
    """Parse dictionary file text; errors carry the offending line number."""
    rules: list[PhraseRule] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rules.append(_parse_rule_line(stripped, line_no))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Dictionary(rules=tuple(rules), source_digest=digest)


def load_dictionary(path: str | Path) -> Dictionary:
    return parse_dictionary(Path(path).read_text(encoding="utf-8"))


def load_bundled_dictionary() -> Dictionary:
    text = resources.files("screener").joinpath("assets", BUNDLED_DICTIONARY).read_text("utf-8")
    return parse_dictionary(text)


def _render_slot(slot: Slot) -> str:
    alts = [" ".join(alt) for alt in slot.alternatives]
    if len(alts) == 1 and " " not in alts[0]:
        return alts[0]
    return "(" + " | ".join(alts) + ")"


def render_pattern(rule: PhraseRule) -> str:
    """Pattern half of a rule in file-format syntax."""
    return " ".join(_render_slot(s) for s in rule.pattern)


def serialize_dictionary(dictionary: Dictionary, header: str = "phrase dictionary") -> str:
    """Render to file-format text; `parse_dictionary` round-trips the rules.

    Ids are re-derived from line positions where possible and emitted as
    explicit tags otherwise, so parse(serialize(d)) compares equal to d.
    """
    lines = [f"# {header}"]
    for rule in dictionary.rules:
        line_no = len(lines) + 1
        parts = [" ".join(_render_slot(s) for s in rule.pattern), "->", rule.expected]
        if rule.status == "candidate":
            parts.append("@candidate")
        if rule.id != f"r{line_no}":
            parts.append(f"@id={rule.id}")
        if rule.note:
            parts.append(f"@note={rule.note}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def make_rule(
    pattern: str,
    expected: str,
    *,
    rule_id: str,
    status: RuleStatus = "candidate",
    note: str | None = None,
) -> PhraseRule:
    """Build a rule from pattern text. New rules default to candidate status."""
    return PhraseRule(
        id=rule_id,
        pattern=parse_pattern(pattern),
        expected=expected.strip(),
        status=status,
        note=note,
    )


def add_rule(dictionary: Dictionary, rule: PhraseRule) -> Dictionary:
    """A new dictionary with `rule` appended; rejects duplicate ids."""
    if dictionary.get(rule.id) is not None:
        raise DictionaryError(f"duplicate rule id: {rule.id}")
    rules = dictionary.rules + (rule,)
    digest = hashlib.sha256(serialize_dictionary(Dictionary(rules=rules)).encode("utf-8")).hexdigest()
    return Dictionary(rules=rules, source_digest=digest)


def rule_phrases(rule: PhraseRule) -> list[str]:
    """Every concrete phrase a rule can match, in alternative file order."""
    if rule.phrase_count() > EXPORT_PHRASE_CAP:
        raise DictionaryError(
            f"rule {rule.id} expands to {rule.phrase_count()} phrases (cap {EXPORT_PHRASE_CAP})"
        )
    phrases = []
    for combo in itertools.product(*(slot.alternatives for slot in rule.pattern)):
        phrases.append(" ".join(token for alt in combo for token in alt))
    return phrases


def export_search_query(
    dictionary: Dictionary,
    rules: Iterable[str] | None = None,
    quote: Literal["double", "single"] = "double",
) -> str:
    """OR-of-quoted-phrases query for full-text search engines.

    Expands every rule (or the given rule ids) into its concrete phrases,
    deduplicated in first-occurrence order.
    """
    if rules is None:
        selected = list(dictionary.rules)
    else:
        selected = []
        for rule_id in rules:
            rule = dictionary.get(rule_id)
            if rule is None:
                raise DictionaryError(f"unknown rule id: {rule_id}")
            selected.append(rule)
    if not selected:
        raise DictionaryError("nothing to export: no rules selected")
    if quote not in ("double", "single"):
        raise ValueError(f"bad quote style: {quote!r}")
    mark = '"' if quote == "double" else "'"
    phrases: list[str] = []
    seen: set[str] = set()
    for rule in selected:
        for phrase in rule_phrases(rule):
            if phrase not in seen:
                seen.add(phrase)
                phrases.append(phrase)
    return " OR ".join(f"{mark}{p}{mark}" for p in phrases)
