"""Editorial-timeline forensics.

Three lenses on submission/revision/acceptance dates: summary statistics
of assessment duration, country shares among unusually fast and slow
assessments, and detection of blocks of articles whose three dates all
fall within adjacent-day windows (a fingerprint of batched editorial
handling that is vanishingly unlikely to arise by chance at size).
"""

from __future__ import annotations

import statistics
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Callable, Iterable, Sequence

from .corpus_ingest import ArticleRecord

# Duration thresholds (days) for the fast/slow share comparison.
FAST_BELOW = 30
SLOW_AT_LEAST = 41


class EmptyPeriodError(ValueError):
    pass


@dataclass(frozen=True)
class DurationStats:
    n: int
    min: int
    max: int
    avg: float
    stddev: float
    median: float


def duration_stats(
    records: Iterable[ArticleRecord],
    predicate: Callable[[ArticleRecord], bool] | None = None,
) -> DurationStats:
    """Assessment-duration statistics over records passing `predicate`.

    Sample standard deviation (n-1); zero for a single record. Median of
    an even count is the midpoint of the two central values.
    """
    durations = [r.assessment_duration() for r in records if predicate is None or predicate(r)]
    if not durations:
        raise EmptyPeriodError("no records in period")
    return DurationStats(
        n=len(durations),
        min=min(durations),
        max=max(durations),
        avg=statistics.fmean(durations),
        stddev=statistics.stdev(durations) if len(durations) > 1 else 0.0,
        median=float(statistics.median(durations)),
    )


def volume_predicate(lo: int, hi: int) -> Callable[[ArticleRecord], bool]:
    """Match records whose volume parses as an int in [lo, hi]."""

    def check(record: ArticleRecord) -> bool:
        try:
            vol = int(record.volume)
        except (TypeError, ValueError):
            return False
        return lo <= vol <= hi

    return check


def accepted_between(start: date, end: date) -> Callable[[ArticleRecord], bool]:
    """Match records accepted in [start, end]."""

    def check(record: ArticleRecord) -> bool:
        return start <= record.accepted <= end

    return check


@dataclass(frozen=True)
class ShareSide:
    matching: int
    total: int

    @property
    def percentage(self) -> float | None:
        """Percent of matching records; None when the side is empty."""
        if self.total == 0:
            return None
        return 100.0 * self.matching / self.total


@dataclass(frozen=True)
class CountryShares:
    country: str
    fast: ShareSide
    slow: ShareSide


def country_shares(
    records: Iterable[ArticleRecord],
    country: str,
    fast_below: int = FAST_BELOW,
    slow_at_least: int = SLOW_AT_LEAST,
) -> CountryShares:
    """Share of records with any author from `country`, fast vs slow side.

    Fast means assessment took fewer than `fast_below` days, slow at least
    `slow_at_least`; the gap between the two is ignored by design.
    """
    if fast_below > slow_at_least:
        raise ValueError("fast_below must not exceed slow_at_least")
    wanted = country.strip().upper()
    fast_match = fast_total = slow_match = slow_total = 0
    for record in records:
        duration = record.assessment_duration()
        has_country = any(c.strip().upper() == wanted for c in record.countries)
        if duration < fast_below:
            fast_total += 1
            fast_match += has_country
        elif duration >= slow_at_least:
            slow_total += 1
            slow_match += has_country
    return CountryShares(
        country=wanted,
        fast=ShareSide(matching=fast_match, total=fast_total),
        slow=ShareSide(matching=slow_match, total=slow_total),
    )


@dataclass(frozen=True)
class Block:
    """Articles whose dates cluster on a common anchor triple.

    A record (s, r, a) belongs to anchor (x, y, z) when s is x or x+1,
    r is y or y+1, and a is z or z+1.
    """

    anchor: tuple[date, date, date]
    members: frozenset[str]

    @property
    def size(self) -> int:
        return len(self.members)


def detect_blocks(records: Iterable[ArticleRecord], min_size: int = 10) -> list[Block]:
    """Date-cluster blocks of at least `min_size` members.

    Candidate anchors are every record's date triple shifted by each of
    the eight {0,-1} day combinations; identical member sets collapse to
    the lexicographically smallest anchor. Records without a revision
    date cannot participate. Result is sorted by size descending, then
    anchor ascending.
    """
    if min_size < 1:
        raise ValueError("min_size must be at least 1")
    one = timedelta(days=1)
    by_submitted: dict[date, set[str]] = defaultdict(set)
    by_revised: dict[date, set[str]] = defaultdict(set)
    by_accepted: dict[date, set[str]] = defaultdict(set)
    anchors: set[tuple[date, date, date]] = set()
    usable = 0
    for record in records:
        if record.revised is None:
            continue
        usable += 1
        by_submitted[record.submitted].add(record.id)
        by_revised[record.revised].add(record.id)
        by_accepted[record.accepted].add(record.id)
        for ds in (timedelta(0), one):
            for dr in (timedelta(0), one):
                for da in (timedelta(0), one):
                    anchors.add((record.submitted - ds, record.revised - dr, record.accepted - da))
    if not usable:
        return []

    def members_on(index: dict[date, set[str]], day: date) -> set[str]:
        return index.get(day, set()) | index.get(day + one, set())

    best_anchor: dict[frozenset[str], tuple[date, date, date]] = {}
    for anchor in sorted(anchors):
        x, y, z = anchor
        candidates = members_on(by_submitted, x)
        if len(candidates) < min_size:
            continue
        candidates = candidates & members_on(by_revised, y)
        if len(candidates) < min_size:
            continue
        candidates = candidates & members_on(by_accepted, z)
        if len(candidates) < min_size:
            continue
        key = frozenset(candidates)
        if key not in best_anchor:  # anchors iterate in ascending order
            best_anchor[key] = anchor
    blocks = [Block(anchor=anchor, members=members) for members, anchor in best_anchor.items()]
    blocks.sort(key=lambda b: (-b.size, b.anchor))
    return blocks


def blocks_to_json(blocks: Sequence[Block]) -> list[dict]:
    return [
        {
            "anchor": [d.isoformat() for d in block.anchor],
            "size": block.size,
            "member_ids": sorted(block.members),
        }
        for block in blocks
    ]
