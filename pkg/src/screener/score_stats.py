"""Detector-score distribution statistics.

Empirical CDFs wrapped in distribution-free Dvoretzky-Kiefer-Wolfowitz
confidence bands, decile histograms, a band-separation test, and
per-journal aggregates of high-scoring documents.

All internal math runs at full float precision; percentages are rounded
(half-up, one decimal) only when a report is emitted.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Literal, Sequence


def round_half_up(value: float, decimals: int = 1) -> float:
    """Decimal rounding so that e.g. 72.15 -> 72.2 rather than banker's 72.1."""
    quantum = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def dkw_epsilon(n: int, alpha: float) -> float:
    """Half-width of the DKW confidence band for n samples at level alpha."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < alpha < 2:
        raise ValueError("alpha must be in (0, 2)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


@dataclass(frozen=True)
class EcdfBand:
    """Empirical CDF of scores with a simultaneous DKW confidence band.

    The band holds for the whole CDF at once: with probability at least
    1 - alpha, the true CDF lies within +/- epsilon of the empirical one
    everywhere. Envelopes are clamped to [0, 1].
    """

    samples: tuple[float, ...]  # sorted ascending
    alpha: float

    @property
    def n(self) -> int:
        return len(self.samples)

    @property
    def epsilon(self) -> float:
        return dkw_epsilon(self.n, self.alpha)

    def cdf(self, t: float) -> float:
        """F(t): fraction of samples <= t."""
        return bisect_right(self.samples, t) / self.n

    def cdf_left(self, t: float) -> float:
        """Left limit F(t-): fraction of samples strictly below t."""
        return bisect_left(self.samples, t) / self.n

    def evaluate(self, t: float) -> tuple[float, float, float]:
        """(lower, F, upper) at t, envelopes clamped to [0, 1]."""
        f = self.cdf(t)
        return (max(0.0, f - self.epsilon), f, min(1.0, f + self.epsilon))

    def evaluate_left(self, t: float) -> tuple[float, float, float]:
        """(lower, F(t-), upper) using the left limit, clamped."""
        f = self.cdf_left(t)
        return (max(0.0, f - self.epsilon), f, min(1.0, f + self.epsilon))


def ecdf(samples: Iterable[float], alpha: float) -> EcdfBand:
    values = sorted(float(s) for s in samples)
    if not values:
        raise ValueError("need at least one sample")
    for v in values:
        if not math.isfinite(v) or not 0.0 <= v <= 1.0:
            raise ValueError(f"sample out of [0, 1]: {v!r}")
    dkw_epsilon(len(values), alpha)  # validates alpha
    return EcdfBand(samples=tuple(values), alpha=alpha)


def band_to_json(band: EcdfBand) -> dict:
    """Step-function export: rows [x, lower, F, upper] at each jump.

    Synthetic endpoint rows at 0.0 and 1.0 are included so a renderer
    can draw the full unit interval without re-deriving the envelope.
    """
    xs: list[float] = []
    if not band.samples or band.samples[0] > 0.0:
        xs.append(0.0)
    last = None
    for v in band.samples:
        if v != last:
            xs.append(v)
            last = v
    if band.samples[-1] < 1.0:
        xs.append(1.0)
    return {
        "n": band.n,
        "alpha": band.alpha,
        "epsilon": band.epsilon,
        "steps": [[x, *band.evaluate(x)] for x in xs],
    }


@dataclass(frozen=True)
class ScoreHistogram:
    """Counts over ten equal score bins; the last bin is closed at 1.0."""

    counts: tuple[int, ...]
    n: int

    def percentages(self) -> tuple[float, ...]:
        if self.n == 0:
            return tuple(0.0 for _ in self.counts)
        return tuple(100.0 * c / self.n for c in self.counts)


_BIN_EDGES = tuple(i / 10 for i in range(1, 10))

HISTOGRAM_BIN_LABELS = tuple(
    f"[{i / 10:.1f}, {(i + 1) / 10:.1f}" + (")" if i < 9 else "]") for i in range(10)
)


def histogram(samples: Iterable[float]) -> ScoreHistogram:
    counts = [0] * 10
    n = 0
    for s in samples:
        value = float(s)
        if not math.isfinite(value) or not 0.0 <= value <= 1.0:
            raise ValueError(f"sample out of [0, 1]: {value!r}")
        counts[bisect_right(_BIN_EDGES, value) if value < 1.0 else 9] += 1
        n += 1
    return ScoreHistogram(counts=tuple(counts), n=n)


Verdict = Literal["separated", "undecided"]


@dataclass(frozen=True)
class CutoffVerdict:
    cutoff: float
    verdict: Verdict


def separated_at(experimental: EcdfBand, control: EcdfBand, cutoff: float) -> bool:
    """Whether the bands certify a real difference at `cutoff`.

    Uses the left limit F(t-): a sample exactly at the cutoff counts as
    above it. Separation requires the experimental upper envelope to sit
    strictly below the control lower envelope, i.e. even the most
    pessimistic pair of true CDFs compatible with the data differ.
    """
    if not 0.0 < cutoff < 1.0:
        raise ValueError("cutoff must be strictly inside (0, 1)")
    if not math.isclose(experimental.alpha, control.alpha, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError("bands built with different alpha are not comparable")
    exp_upper = experimental.evaluate_left(cutoff)[2]
    ctrl_lower = control.evaluate_left(cutoff)[0]
    return exp_upper < ctrl_lower


def separation_test(
    experimental: EcdfBand,
    control: EcdfBand,
    cutoffs: Sequence[float],
) -> list[CutoffVerdict]:
    return [
        CutoffVerdict(
            cutoff=c,
            verdict="separated" if separated_at(experimental, control, c) else "undecided",
        )
        for c in cutoffs
    ]


@dataclass(frozen=True)
class JournalAggregate:
    journal: str
    high_count: int
    avg_high: float  # mean score among high-scoring docs, in percent
    share: float  # high-scoring docs as percent of the journal's total
    total: int


def journal_aggregate(
    scored: Iterable[tuple[str, float]],
    threshold: float = 0.70,
    min_high: int = 25,
) -> list[JournalAggregate]:
    """Per-journal aggregates of documents scoring at least `threshold`.

    `scored` yields (journal, score) pairs. Journals with fewer than
    `min_high` high-scoring documents are omitted. Sorted by high count
    descending, journal name ascending. Values are full precision;
    round at emission.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    totals: dict[str, int] = {}
    high_counts: dict[str, int] = {}
    high_sums: dict[str, float] = {}
    for journal, score in scored:
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"score out of [0, 1]: {score!r}")
        totals[journal] = totals.get(journal, 0) + 1
        if score >= threshold:
            high_counts[journal] = high_counts.get(journal, 0) + 1
            high_sums[journal] = high_sums.get(journal, 0.0) + score
    aggregates = [
        JournalAggregate(
            journal=journal,
            high_count=count,
            avg_high=100.0 * high_sums[journal] / count,
            share=100.0 * count / totals[journal],
            total=totals[journal],
        )
        for journal, count in high_counts.items()
        if count >= min_high
    ]
    aggregates.sort(key=lambda a: (-a.high_count, a.journal))
    return aggregates
