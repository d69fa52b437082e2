from __future__ import annotations

from datetime import date, timedelta

import pytest

from screener.corpus_ingest import ArticleRecord
from screener.phrase_dictionary import Dictionary, load_bundled_dictionary
from screener.spinner import Thesaurus, load_bundled_thesaurus


@pytest.fixture(scope="session")
def bundled_dictionary() -> Dictionary:
    return load_bundled_dictionary()


@pytest.fixture(scope="session")
def bundled_thesaurus() -> Thesaurus:
    return load_bundled_thesaurus()


def make_record(
    rec_id: str = "a1",
    *,
    title: str = "A study",
    submitted: str | date = "2020-01-01",
    accepted: str | date = "2020-03-01",
    revised: str | date | None = None,
    duration: int | None = None,
    **kwargs,
) -> ArticleRecord:
    """Keyword-arg record builder; `duration` overrides the accepted date."""
    sub = date.fromisoformat(submitted) if isinstance(submitted, str) else submitted
    if duration is not None:
        acc = sub + timedelta(days=duration)
    else:
        acc = date.fromisoformat(accepted) if isinstance(accepted, str) else accepted
    rev = date.fromisoformat(revised) if isinstance(revised, str) else revised
    return ArticleRecord(id=rec_id, title=title, submitted=sub, accepted=acc, revised=rev, **kwargs)


@pytest.fixture
def record_builder():
    return make_record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one visible pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    if getattr(item.module, "__name__", "") != "test_acceptance":
        return
    if not (report.when == "call" or (report.when == "setup" and report.skipped)):
        return
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    if report.skipped:
        status = "SKIP"
    else:
        status = "PASS" if report.passed else "FAIL"
    print(f"\n[{status}] {doc}", flush=True)
