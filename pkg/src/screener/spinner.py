"""Thesaurus-driven synonym substitution.

Mimics the rewriting tools that produce tortured phrases in the first
place: replace known multi-token phrases with randomly chosen "synonyms".
Useful for generating adversarial fixtures and for checking that the
dictionary catches what the rewriter emits.

Thesaurus file format, one entry per non-blank non-comment line:

    source phrase => replacement one | replacement two
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field
from pathlib import Path
from importlib import resources

from .matcher import normalize_tokens

# Exhaustive variant enumeration is only attempted below this many combos.
_ENUMERATION_LIMIT = 4096
# Rejection-sampling attempts per requested variant on large spaces.
_SAMPLE_ATTEMPTS = 50


class ThesaurusError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


MAX_KEY_TOKENS = 3


@dataclass(frozen=True)
class Thesaurus:
    """Normalized source phrases mapped to their replacement phrases."""

    entries: dict[tuple[str, ...], tuple[str, ...]]
    source_digest: str = field(default="", compare=False)

    @property
    def max_key_len(self) -> int:
        return max((len(k) for k in self.entries), default=0)


def parse_thesaurus(text: str) -> Thesaurus:
    """Parse thesaurus text; duplicate keys merge, preserving order."""
    entries: dict[tuple[str, ...], list[str]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("=>")
        if len(parts) != 2:
            raise ThesaurusError("expected exactly one '=>' separator", line_no)
        key = normalize_tokens(parts[0])
        if not key:
            raise ThesaurusError("empty source phrase", line_no)
        if len(key) > MAX_KEY_TOKENS:
            raise ThesaurusError(
                f"source phrase longer than {MAX_KEY_TOKENS} tokens: {' '.join(key)!r}", line_no
            )
        replacements = [alt.strip().casefold() for alt in parts[1].split("|")]
        if any(not alt for alt in replacements):
            raise ThesaurusError("empty replacement", line_no)
        bucket = entries.setdefault(key, [])
        for alt in replacements:
            if alt not in bucket:
                bucket.append(alt)
    for key, replacements in entries.items():
        if len(replacements) == 1 and normalize_tokens(replacements[0]) == key:
            raise ThesaurusError(f"source {' '.join(key)!r} only maps to itself")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Thesaurus(
        entries={k: tuple(v) for k, v in entries.items()},
        source_digest=digest,
    )


def load_thesaurus(path: str | Path) -> Thesaurus:
    return parse_thesaurus(Path(path).read_text(encoding="utf-8"))


def load_bundled_thesaurus() -> Thesaurus:
    text = resources.files("screener").joinpath("assets", "curated.thesaurus").read_text("utf-8")
    return parse_thesaurus(text)


@dataclass(frozen=True)
class SpinReplacement:
    token_index: int
    source: str
    replacement: str


@dataclass(frozen=True)
class SpinResult:
    text: str
    replacements: tuple[SpinReplacement, ...]


def _segments(thesaurus: Thesaurus, tokens: tuple[str, ...]) -> list[tuple[str, object]]:
    """Split tokens into ("lit", token) and ("key", key-tuple) segments.

    Greedy: at each position the longest matching source phrase wins;
    scanning resumes after the match, so matches never overlap.
    """
    segments: list[tuple[str, object]] = []
    i = 0
    n = len(tokens)
    upper = thesaurus.max_key_len
    while i < n:
        matched = None
        for k in range(min(upper, n - i), 0, -1):
            key = tokens[i : i + k]
            if key in thesaurus.entries:
                matched = key
                break
        if matched is None:
            segments.append(("lit", tokens[i]))
            i += 1
        else:
            segments.append(("key", matched))
            i += len(matched)
    return segments


def spin_detail(
    thesaurus: Thesaurus,
    text: str,
    selector: int | random.Random = 0,
) -> SpinResult:
    """Spin `text`, returning the result plus a ledger of what was replaced.

    `selector` picks among replacements: an int indexes each entry's list
    (clamped to its length), a `random.Random` draws uniformly. Output is
    normalized: lowercase tokens joined by single spaces.
    """
    tokens = normalize_tokens(text)
    out: list[str] = []
    replacements: list[SpinReplacement] = []
    position = 0
    for kind, payload in _segments(thesaurus, tokens):
        if kind == "lit":
            out.append(payload)  # type: ignore[arg-type]
            position += 1
            continue
        key = payload  # type: tuple[str, ...]
        options = thesaurus.entries[key]
        if isinstance(selector, random.Random):
            choice = selector.choice(options)
        else:
            choice = options[min(selector, len(options) - 1)]
        out.append(choice)
        replacements.append(
            SpinReplacement(token_index=position, source=" ".join(key), replacement=choice)
        )
        position += len(key)
    return SpinResult(text=" ".join(out), replacements=tuple(replacements))


def spin(thesaurus: Thesaurus, text: str, selector: int | random.Random = 0) -> str:
    return spin_detail(thesaurus, text, selector).text


def spin_variants(thesaurus: Thesaurus, text: str, k: int, seed: int = 0) -> list[str]:
    """Up to `k` distinct spins of `text`, deterministic for a given seed.

    Which phrases get replaced does not depend on the selector, so the
    variant space is the cross product of per-match option counts. Small
    spaces are enumerated exhaustively (guaranteeing all distinct variants
    when fewer than k exist); large ones are sampled with a retry cap.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    tokens = normalize_tokens(text)
    segments = _segments(thesaurus, tokens)
    option_counts = [len(thesaurus.entries[seg[1]]) for seg in segments if seg[0] == "key"]
    rng = random.Random(seed)

    def realize(choice_by_match: tuple[int, ...]) -> str:
        out: list[str] = []
        match_no = 0
        for kind, payload in segments:
            if kind == "lit":
                out.append(payload)  # type: ignore[arg-type]
            else:
                options = thesaurus.entries[payload]
                out.append(options[choice_by_match[match_no]])
                match_no += 1
        return " ".join(out)

    total = 1
    for c in option_counts:
        total *= c
    variants: list[str] = []
    seen: set[str] = set()
    if total <= _ENUMERATION_LIMIT:
        combos = list(itertools.product(*(range(c) for c in option_counts)))
        rng.shuffle(combos)
        for combo in combos:
            candidate = realize(combo)
            if candidate not in seen:
                seen.add(candidate)
                variants.append(candidate)
            if len(variants) == k:
                break
    else:
        for _ in range(k * _SAMPLE_ATTEMPTS):
            combo = tuple(rng.randrange(c) for c in option_counts)
            candidate = realize(combo)
            if candidate not in seen:
                seen.add(candidate)
                variants.append(candidate)
            if len(variants) == k:
                break
    return variants
