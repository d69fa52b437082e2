"""Report serialization: delimited outputs, JSON bundles, run manifests.

Writers are deliberately dumb and deterministic: fixed column orders,
LF line endings, repr-based float formatting, no timestamps except the
one recorded in the manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import __version__
from .matcher import CorpusScanResult, MatchHit
from .score_stats import JournalAggregate, CutoffVerdict, ScoreHistogram, HISTOGRAM_BIN_LABELS, round_half_up
from .timeline_analytics import DurationStats

HIT_CSV_COLUMNS = ("doc_id", "rule_id", "char_start", "char_end", "matched_text", "expected")
DURATION_CSV_COLUMNS = ("Volumes", "N", "Min", "Avg", "StdDev", "Med", "Max")

EPOCH_TIMESTAMP = "1970-01-01T00:00:00Z"


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(
    command: str,
    parameters: Mapping[str, object],
    inputs: Sequence[str | Path],
    deterministic: bool,
) -> dict:
    """Provenance header for a report bundle.

    The config digest covers the fully resolved parameters, so two runs
    with the same manifest digests and inputs describe the same work.
    """
    canonical = json.dumps(parameters, sort_keys=True, ensure_ascii=False)
    timestamp = (
        EPOCH_TIMESTAMP
        if deterministic
        else datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    )
    return {
        "command": command,
        "tool_version": __version__,
        "timestamp": timestamp,
        "deterministic": deterministic,
        "config_digest": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
        "parameters": dict(parameters),
        "input_digests": {Path(p).name: sha256_file(p) for p in inputs},
    }


def write_json(path: str | Path, payload: object) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def hit_to_mapping(hit: MatchHit) -> dict:
    return {
        "rule_id": hit.rule_id,
        "field": hit.field,
        "char_start": hit.char_span[0],
        "char_end": hit.char_span[1],
        "matched_text": hit.matched_text,
        "expected": hit.expected,
    }


def write_hits_jsonl(path: str | Path, result: CorpusScanResult) -> None:
    """One line per scanned document, hits inline (possibly empty)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in result.documents:
            line = {"doc_id": doc.doc_id, "hits": [hit_to_mapping(h) for h in doc.hits]}
            fh.write(json.dumps(line, ensure_ascii=False) + "\n")


def write_hits_csv(path: str | Path, hits: Iterable[MatchHit]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HIT_CSV_COLUMNS)
        for hit in hits:
            writer.writerow(
                (
                    hit.doc_id,
                    hit.rule_id,
                    str(hit.char_span[0]),
                    str(hit.char_span[1]),
                    hit.matched_text,
                    hit.expected,
                )
            )


def duration_row(label: str, stats: DurationStats | None) -> list[str]:
    if stats is None:
        return [label, "0", "", "", "", "", ""]
    return [
        label,
        str(stats.n),
        str(stats.min),
        f"{round_half_up(stats.avg):g}",
        f"{round_half_up(stats.stddev):g}",
        f"{round_half_up(stats.median):g}",
        str(stats.max),
    ]


def write_durations_csv(path: str | Path, rows: Sequence[tuple[str, DurationStats | None]]) -> None:
    """Per-period duration table; an empty period keeps its row, fields blank."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(DURATION_CSV_COLUMNS)
        for label, stats in rows:
            writer.writerow(duration_row(label, stats))


def durations_to_json(rows: Sequence[tuple[str, DurationStats | None]]) -> list[dict]:
    payload = []
    for label, stats in rows:
        entry: dict[str, object] = {"period": label}
        if stats is None:
            entry["n"] = 0
        else:
            entry.update(asdict(stats))
        payload.append(entry)
    return payload


def write_histogram_csv(path: str | Path, histograms: Mapping[str, ScoreHistogram]) -> None:
    """Decile table, one percentage column per score set, 1 decimal."""
    names = list(histograms)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin", *names])
        columns = {name: histograms[name].percentages() for name in names}
        for i, label in enumerate(HISTOGRAM_BIN_LABELS):
            writer.writerow([label, *(f"{round_half_up(columns[name][i]):g}" for name in names)])


def write_verdicts_csv(path: str | Path, verdicts: Mapping[str, Sequence[CutoffVerdict]]) -> None:
    """Cutoff rows, one verdict column per control set."""
    names = list(verdicts)
    cutoffs = [v.cutoff for v in next(iter(verdicts.values()))] if names else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cutoff", *names])
        for i, cutoff in enumerate(cutoffs):
            writer.writerow([f"{cutoff:g}", *(verdicts[name][i].verdict for name in names)])


def write_journals_csv(path: str | Path, aggregates: Sequence[JournalAggregate]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["journal", "avg_high", "high_count", "share", "total"])
        for agg in aggregates:
            writer.writerow(
                (
                    agg.journal,
                    f"{round_half_up(agg.avg_high):g}",
                    str(agg.high_count),
                    f"{round_half_up(agg.share):g}",
                    str(agg.total),
                )
            )


def journals_to_json(aggregates: Sequence[JournalAggregate]) -> list[dict]:
    return [
        {
            "journal": a.journal,
            "avg_high": round_half_up(a.avg_high),
            "high_count": a.high_count,
            "share": round_half_up(a.share),
            "total": a.total,
        }
        for a in aggregates
    ]
