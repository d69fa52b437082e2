"""Command-line interface.

Subcommands mirror the screening workflow: `scan` for dictionary hits,
`timeline` for editorial-date forensics, `scores` for detector-score
distribution comparison, `spin` for adversarial fixture generation, and
`serve` for the review service. Report commands write a bundle directory
holding delimited outputs, JSON mirrors, rendered figures, and a run
manifest.

Exit codes: 0 success, 2 partial results (some records skipped or
rejected), 1 fatal. Flags beat config-file values; the config file is
flat `key = value` lines, found via --config or SCREENER_CONFIG.
"""

from __future__ import annotations

import csv
import json
import socket
import sys
from datetime import date
from pathlib import Path

import click

from . import __version__
from .corpus_ingest import filter_full_length, load_corpus
from .detector_gateway import read_scores_csv
from .matcher import SCAN_FIELDS, scan_corpus
from .phrase_dictionary import DictionaryError, load_dictionary
from .score_stats import (
    CutoffVerdict,
    band_to_json,
    ecdf,
    histogram,
    journal_aggregate,
    round_half_up,
    separation_test,
)
from .spinner import ThesaurusError, load_thesaurus, spin_variants
from .timeline_analytics import (
    EmptyPeriodError,
    accepted_between,
    blocks_to_json,
    country_shares,
    detect_blocks,
    duration_stats,
    volume_predicate,
)
from . import reports

EXIT_PARTIAL = 2

DEFAULT_CUTOFFS = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"


def _load_config(path: str | None) -> dict[str, str]:
    """Flat `key = value` config; quotes around values are optional."""
    if not path:
        return {}
    config: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise click.ClickException(f"config line {line_no}: expected key = value")
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        config[key.strip()] = value
    return config


def _setting(ctx: click.Context, key: str, flag_value, default):
    """Flag > config file > default."""
    if flag_value is not None:
        return flag_value
    config: dict[str, str] = ctx.obj or {}
    if key in config:
        return config[key]
    return default


def _parse_alpha(raw: str | float) -> float:
    if isinstance(raw, float):
        return raw
    text = str(raw).strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return float(num) / float(den)
    return float(text)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


@click.group()
@click.version_option(version=__version__, prog_name="screener")
@click.option(
    "--config",
    "config_path",
    envvar="SCREENER_CONFIG",
    type=click.Path(dir_okay=False),
    default=None,
    help="Flat key = value settings file (env: SCREENER_CONFIG).",
)
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Research-integrity screening toolkit."""
    ctx.obj = _load_config(config_path)


# ---------------------------------------------------------------------------
# scan


@main.command("scan")
@click.argument("dictionary_path", metavar="DICTIONARY", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_path", metavar="CORPUS", type=click.Path(exists=True, dir_okay=False))
@click.option("--fields", "fields_opt", default=None, help="Comma-separated record fields to scan.")
@click.option("--out", "out_opt", default=None, type=click.Path(file_okay=False), help="Report directory.")
@click.option("--deterministic", is_flag=True, help="Freeze the manifest timestamp for reproducible bytes.")
@click.option("--stdout", "to_stdout", is_flag=True, help="Stream the hits CSV to stdout instead of writing a bundle.")
@click.option("--figures/--no-figures", default=True, help="Render figures alongside the delimited output.")
@click.pass_context
def cmd_scan(
    ctx: click.Context,
    dictionary_path: str,
    corpus_path: str,
    fields_opt: str | None,
    out_opt: str | None,
    deterministic: bool,
    to_stdout: bool,
    figures: bool,
) -> None:
    """Scan a JSONL corpus for dictionary phrases."""
    fields_raw = _setting(ctx, "fields", fields_opt, "title,abstract")
    fields = tuple(f.strip() for f in str(fields_raw).split(",") if f.strip())
    bad = [f for f in fields if f not in SCAN_FIELDS]
    if bad or not fields:
        raise click.ClickException(f"fields must be among {', '.join(SCAN_FIELDS)}")

    try:
        dictionary = load_dictionary(dictionary_path).confirmed_only()
    except DictionaryError as exc:
        raise click.ClickException(f"dictionary: {exc}") from exc

    records: list[dict] = []
    bad_lines = 0
    with open(corpus_path, encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except ValueError:
                bad_lines += 1
                continue
            if isinstance(obj, dict):
                records.append(obj)
            else:
                bad_lines += 1

    result = scan_corpus(dictionary, records, fields=fields)
    result.summary.skipped += bad_lines

    if to_stdout:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(reports.HIT_CSV_COLUMNS)
        for hit in result.hits:
            writer.writerow(
                (hit.doc_id, hit.rule_id, str(hit.char_span[0]), str(hit.char_span[1]), hit.matched_text, hit.expected)
            )
    else:
        out = _out_dir(_setting(ctx, "out", out_opt, "scan_report"))
        reports.write_hits_jsonl(out / "hits.jsonl", result)
        reports.write_hits_csv(out / "hits.csv", result.hits)
        summary = {
            "documents_scanned": result.summary.documents_scanned,
            "documents_flagged": result.summary.documents_flagged,
            "skipped": result.summary.skipped,
            "hits_per_rule": dict(sorted(result.summary.hits_per_rule.items())),
            "rules": len(dictionary),
        }
        reports.write_json(out / "summary.json", summary)
        if figures:
            from . import figures as fig

            fig.render_rule_counts(out / "rule_counts.png", result.summary.hits_per_rule)
        manifest = reports.build_manifest(
            command="scan",
            parameters={"fields": list(fields)},
            inputs=[dictionary_path, corpus_path],
            deterministic=deterministic,
        )
        reports.write_json(out / "manifest.json", manifest)
        click.echo(
            f"scanned {result.summary.documents_scanned} documents, "
            f"flagged {result.summary.documents_flagged}, "
            f"{len(result.hits)} hits, skipped {result.summary.skipped}",
            err=True,
        )
    if result.summary.skipped:
        ctx.exit(EXIT_PARTIAL)


# ---------------------------------------------------------------------------
# timeline


def _parse_period(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise click.ClickException(f"period {spec!r}: expected NAME:FROM:TO")
    name, lo, hi = (p.strip() for p in parts)
    if not name:
        raise click.ClickException(f"period {spec!r}: empty name")
    try:
        return name, volume_predicate(int(lo), int(hi))
    except ValueError:
        pass
    try:
        return name, accepted_between(date.fromisoformat(lo), date.fromisoformat(hi))
    except ValueError as exc:
        raise click.ClickException(f"period {spec!r}: bounds must both be volumes or ISO dates") from exc


@main.command("timeline")
@click.argument("corpus_path", metavar="CORPUS", type=click.Path(exists=True, dir_okay=False))
@click.option("--period", "periods_opt", multiple=True, metavar="NAME:FROM:TO", help="Volume range or accepted-date range; repeatable.")
@click.option("--blocks", "blocks_opt", is_flag=True, help="Detect same-date blocks.")
@click.option("--min-size", "min_size_opt", type=int, default=None, help="Smallest block to report (default 10).")
@click.option("--country", "country_opt", default=None, help="Country code for fast/slow share comparison.")
@click.option("--full-length-only", is_flag=True, help="Drop records that are not full-length articles first.")
@click.option("--out", "out_opt", default=None, type=click.Path(file_okay=False))
@click.option("--deterministic", is_flag=True)
@click.option("--stdout", "to_stdout", is_flag=True, help="Stream the durations CSV to stdout instead of writing a bundle.")
@click.option("--figures/--no-figures", default=True)
@click.pass_context
def cmd_timeline(
    ctx: click.Context,
    corpus_path: str,
    periods_opt: tuple[str, ...],
    blocks_opt: bool,
    min_size_opt: int | None,
    country_opt: str | None,
    full_length_only: bool,
    out_opt: str | None,
    deterministic: bool,
    to_stdout: bool,
    figures: bool,
) -> None:
    """Assessment-duration statistics, country shares, and block detection."""
    records, ingest = load_corpus(corpus_path)
    if full_length_only:
        records = filter_full_length(records, ingest)

    period_specs = list(periods_opt) or [
        p.strip() for p in str(_setting(ctx, "periods", None, "")).split(";") if p.strip()
    ]
    named = [_parse_period(p) for p in period_specs] or [("all", None)]

    rows = []
    durations_by_period = {}
    for name, predicate in named:
        try:
            stats = duration_stats(records, predicate)
        except EmptyPeriodError:
            stats = None
        rows.append((name, stats))
        durations_by_period[name] = [
            r.assessment_duration() for r in records if predicate is None or predicate(r)
        ]

    if to_stdout:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(reports.DURATION_CSV_COLUMNS)
        for label, stats in rows:
            writer.writerow(reports.duration_row(label, stats))
        if ingest.rejected:
            ctx.exit(EXIT_PARTIAL)
        return

    out = _out_dir(_setting(ctx, "out", out_opt, "timeline_report"))
    reports.write_durations_csv(out / "durations.csv", rows)
    reports.write_json(out / "durations.json", reports.durations_to_json(rows))

    inputs = [corpus_path]
    parameters: dict[str, object] = {
        "periods": period_specs,
        "full_length_only": full_length_only,
    }

    do_blocks = blocks_opt or str(_setting(ctx, "blocks", None, "")).lower() in ("1", "true", "yes")
    if do_blocks:
        min_size = int(_setting(ctx, "min_size", min_size_opt, 10))
        blocks = detect_blocks(records, min_size=min_size)
        no_revision = sum(1 for r in records if r.revised is None)
        reports.write_json(
            out / "blocks.json",
            {
                "min_size": min_size,
                "excluded_missing_revision": no_revision,
                "blocks": blocks_to_json(blocks),
            },
        )
        parameters["min_size"] = min_size
        if figures:
            from . import figures as fig

            fig.render_blocks(out / "blocks.png", blocks)

    country = _setting(ctx, "country", country_opt, None)
    if country:
        shares = country_shares(records, str(country))
        payload = {
            "country": shares.country,
            "fast": {
                "matching": shares.fast.matching,
                "total": shares.fast.total,
                "percentage": None if shares.fast.percentage is None else round_half_up(shares.fast.percentage),
            },
            "slow": {
                "matching": shares.slow.matching,
                "total": shares.slow.total,
                "percentage": None if shares.slow.percentage is None else round_half_up(shares.slow.percentage),
            },
        }
        reports.write_json(out / "country_shares.json", payload)
        parameters["country"] = shares.country

    if figures:
        from . import figures as fig

        fig.render_duration_histogram(out / "durations.png", durations_by_period)

    manifest = reports.build_manifest(
        command="timeline", parameters=parameters, inputs=inputs, deterministic=deterministic
    )
    reports.write_json(out / "manifest.json", manifest)
    click.echo(
        f"{ingest.accepted_count} records ({ingest.rejected} rejected, "
        f"{ingest.dropped_missing_acceptance} without acceptance date)",
        err=True,
    )
    if ingest.rejected:
        ctx.exit(EXIT_PARTIAL)


# ---------------------------------------------------------------------------
# scores


@main.command("scores")
@click.argument("experimental_path", metavar="EXPERIMENTAL", type=click.Path(exists=True, dir_okay=False))
@click.option("--control", "control_paths", multiple=True, type=click.Path(exists=True, dir_okay=False), help="Control score dump; repeatable.")
@click.option("--alpha", "alpha_opt", default=None, help="Band miss probability, float or fraction (default 1/120).")
@click.option("--cutoffs", "cutoffs_opt", default=None, help="Comma-separated score cutoffs for the separation test.")
@click.option("--threshold", "threshold_opt", type=float, default=None, help="High-score threshold for journal aggregates (default 0.70).")
@click.option("--min-high", "min_high_opt", type=int, default=None, help="Smallest high-score count a journal must reach (default 25).")
@click.option("--out", "out_opt", default=None, type=click.Path(file_okay=False))
@click.option("--deterministic", is_flag=True)
@click.option("--stdout", "to_stdout", is_flag=True, help="Stream the verdicts CSV to stdout instead of writing a bundle.")
@click.option("--figures/--no-figures", default=True)
@click.pass_context
def cmd_scores(
    ctx: click.Context,
    experimental_path: str,
    control_paths: tuple[str, ...],
    alpha_opt: str | None,
    cutoffs_opt: str | None,
    threshold_opt: float | None,
    min_high_opt: int | None,
    out_opt: str | None,
    deterministic: bool,
    to_stdout: bool,
    figures: bool,
) -> None:
    """Compare detector-score distributions with confidence bands."""
    try:
        alpha = _parse_alpha(_setting(ctx, "alpha", alpha_opt, "1/120"))
        cutoffs = [float(c) for c in str(_setting(ctx, "cutoffs", cutoffs_opt, DEFAULT_CUTOFFS)).split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise click.ClickException(f"bad numeric option: {exc}") from exc
    threshold = float(_setting(ctx, "threshold", threshold_opt, 0.70))
    min_high = int(_setting(ctx, "min_high", min_high_opt, 25))

    sets: dict[str, str] = {}
    for path in (experimental_path, *control_paths):
        name = Path(path).stem
        if name in sets:
            raise click.ClickException(f"duplicate score set name: {name}")
        sets[name] = path
    exp_name = Path(experimental_path).stem

    scores = {}
    journals = {}
    for name, path in sets.items():
        try:
            scores[name], journals[name] = read_scores_csv(path)
        except (OSError, ValueError) as exc:
            raise click.ClickException(f"{path}: {exc}") from exc
        if not scores[name]:
            raise click.ClickException(f"{path}: no scores")

    try:
        bands = {name: ecdf([s.score for s in ss], alpha) for name, ss in scores.items()}
        verdicts: dict[str, list[CutoffVerdict]] = {
            name: separation_test(bands[exp_name], bands[name], cutoffs)
            for name in sets
            if name != exp_name
        }
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc

    if to_stdout:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["cutoff", *verdicts])
        for i, cutoff in enumerate(cutoffs):
            writer.writerow([f"{cutoff:g}", *(verdicts[name][i].verdict for name in verdicts)])
        return

    out = _out_dir(_setting(ctx, "out", out_opt, "scores_report"))
    bands_dir = out / "bands"
    bands_dir.mkdir(exist_ok=True)
    for name, band in bands.items():
        reports.write_json(bands_dir / f"{name}.json", band_to_json(band))

    histograms = {name: histogram([s.score for s in ss]) for name, ss in scores.items()}
    reports.write_histogram_csv(out / "histogram.csv", histograms)
    reports.write_json(
        out / "histograms.json",
        {
            name: {
                "n": h.n,
                "counts": list(h.counts),
                "percentages": [round_half_up(p) for p in h.percentages()],
            }
            for name, h in histograms.items()
        },
    )
    reports.write_verdicts_csv(out / "verdicts.csv", verdicts)
    reports.write_json(
        out / "verdicts.json",
        {
            "experimental": exp_name,
            "alpha": alpha,
            "cutoffs": cutoffs,
            "controls": {name: [v.verdict for v in vs] for name, vs in verdicts.items()},
        },
    )

    for name in sets:
        if journals[name]:
            pairs = [
                (journals[name][s.doc_id], s.score) for s in scores[name] if s.doc_id in journals[name]
            ]
            aggregates = journal_aggregate(pairs, threshold=threshold, min_high=min_high)
            reports.write_journals_csv(out / f"journals_{name}.csv", aggregates)
            reports.write_json(out / f"journals_{name}.json", reports.journals_to_json(aggregates))

    if figures:
        from . import figures as fig

        fig.render_ecdf_bands(out / "ecdf.png", bands)
        fig.render_score_histograms(out / "histogram.png", histograms)

    manifest = reports.build_manifest(
        command="scores",
        parameters={
            "alpha": alpha,
            "cutoffs": cutoffs,
            "threshold": threshold,
            "min_high": min_high,
            "experimental": exp_name,
            "controls": [n for n in sets if n != exp_name],
        },
        inputs=list(sets.values()),
        deterministic=deterministic,
    )
    reports.write_json(out / "manifest.json", manifest)
    click.echo(
        "bands: " + ", ".join(f"{name} (n={band.n}, eps={band.epsilon:.4f})" for name, band in bands.items()),
        err=True,
    )


# ---------------------------------------------------------------------------
# spin


@main.command("spin")
@click.argument("thesaurus_path", metavar="THESAURUS", type=click.Path(exists=True, dir_okay=False))
@click.option("--text", "text_opt", default=None, help="Text to spin; stdin when omitted.")
@click.option("-k", "--variants", "k", type=int, default=1, show_default=True, help="How many distinct variants.")
@click.option("--seed", type=int, default=0, show_default=True)
def cmd_spin(thesaurus_path: str, text_opt: str | None, k: int, seed: int) -> None:
    """Rewrite text through a synonym thesaurus, one variant per line."""
    try:
        thesaurus = load_thesaurus(thesaurus_path)
    except ThesaurusError as exc:
        raise click.ClickException(f"thesaurus: {exc}") from exc
    text = text_opt if text_opt is not None else click.get_text_stream("stdin").read()
    if not text.strip():
        raise click.ClickException("nothing to spin: empty input")
    try:
        for variant in spin_variants(thesaurus, text, k=k, seed=seed):
            click.echo(variant)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc


# ---------------------------------------------------------------------------
# serve


@main.command("serve")
@click.argument("dictionary_path", metavar="DICTIONARY", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_path", metavar="CORPUS", type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8787, show_default=True)
@click.option("--store", "store_dir", default="review_store", show_default=True, type=click.Path(file_okay=False), help="Directory for the label/dictionary event log.")
@click.option("--stats", "stats_dir", default=None, type=click.Path(file_okay=False), help="Report directory whose JSON files the stats endpoints serve.")
@click.option("--fields", "fields_opt", default=None, help="Comma-separated record fields to scan.")
@click.option("--token", default=None, help="Require this bearer token on every endpoint except /health.")
@click.option("--ui", "ui_dir", default=None, type=click.Path(file_okay=False), help="Static review UI directory to serve at /.")
@click.pass_context
def cmd_serve(
    ctx: click.Context,
    dictionary_path: str,
    corpus_path: str,
    host: str,
    port: int,
    store_dir: str,
    stats_dir: str | None,
    fields_opt: str | None,
    token: str | None,
    ui_dir: str | None,
) -> None:
    """Run the match review service."""
    import uvicorn

    from .review_service import create_app

    fields_raw = _setting(ctx, "fields", fields_opt, "title,abstract")
    fields = tuple(f.strip() for f in str(fields_raw).split(",") if f.strip())

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        raise click.ClickException(f"cannot bind {host}:{port}: {exc}") from exc
    finally:
        probe.close()

    try:
        app = create_app(
            dictionary_path=dictionary_path,
            corpus_path=corpus_path,
            store_dir=store_dir,
            stats_dir=stats_dir or _setting(ctx, "stats", None, None),
            fields=fields,
            token=token or _setting(ctx, "token", None, None),
            ui_dir=ui_dir,
        )
    except (DictionaryError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
