"""Unigram descriptive statistics: frequencies, ranks, coverage, Zipf fits."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import GAP, Corpus, EmptyCorpusError


@dataclass(frozen=True)
class FrequencyTable:
    """Counts per sign with their total (probability = count/total)."""

    counts: dict[int, int]
    total: int

    def probability(self, sign: int) -> float:
        return self.counts.get(sign, 0) / self.total


@dataclass(frozen=True)
class ZipfFit:
    """Parameters of log f_r = a - b*log(r + c) fitted in log space."""

    a: float
    b: float
    c: float
    residual: float
    iterations: int
    degenerate: bool = False


def unigram_frequencies(corpus: Corpus) -> FrequencyTable:
    """Occurrence counts over sign tokens only; gaps are skipped."""
    if not corpus.texts:
        raise EmptyCorpusError("cannot count frequencies of an empty corpus")
    counts = Counter()
    for text in corpus.texts:
        for token in text.tokens:
            if token != GAP:
                counts[token] += 1
    return FrequencyTable(counts=dict(counts), total=sum(counts.values()))


def positional_frequencies(corpus: Corpus, position: str) -> FrequencyTable:
    """Counts of first ("beginner") or last ("ender") sign per text.

    A length-1 text counts as both its own beginner and ender.
    """
    if position not in ("beginner", "ender"):
        raise ValueError(f"position must be 'beginner' or 'ender', got {position!r}")
    counts = Counter()
    for text in corpus.texts:
        if text.damaged:
            raise ValueError("positional frequencies need an undamaged corpus")
        counts[text.tokens[0] if position == "beginner" else text.tokens[-1]] += 1
    return FrequencyTable(counts=dict(counts), total=sum(counts.values()))


def rank_frequency(table: FrequencyTable) -> list[tuple[int, int, int]]:
    """(rank, sign, count) by descending count; ties break by ascending sign id."""
    if table.total == 0:
        raise EmptyCorpusError("cannot rank an empty frequency table")
    ordered = sorted(
        ((sign, count) for sign, count in table.counts.items() if count > 0),
        key=lambda item: (-item[1], item[0]),
    )
    return [(rank, sign, count) for rank, (sign, count) in enumerate(ordered, start=1)]


def cumulative_coverage(table: FrequencyTable, fraction: float) -> int:
    """Smallest k such that the top-k ranked signs cover >= fraction of the total."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    threshold = fraction * table.total
    cumulative = 0
    for rank, _sign, count in rank_frequency(table):
        cumulative += count
        # isclose absorbs float error in fraction*total (e.g. 0.8*100 -> 80.00..01)
        if cumulative >= threshold or math.isclose(cumulative, threshold, rel_tol=1e-12, abs_tol=1e-9):
            return rank
    return len(table.counts)


def rank_table_rows(table: FrequencyTable):
    """Rows (rank, sign, count, probability, cumulative) for DSV emission."""
    cumulative = 0
    for rank, sign, count in rank_frequency(table):
        cumulative += count
        yield rank, sign, count, count / table.total, cumulative / table.total


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def fit_zipf_mandelbrot(ranked, *, tolerance: float = 1e-6) -> ZipfFit:
    """Least-squares fit of log f_r = a - b*log(r + c) (natural logs).

    Only c enters nonlinearly, so (a, b) come from a closed-form linear
    solve at fixed c while c is located by golden-section search on
    (-0.99, 10*K].  Needs >= 4 points with frequencies >= 1; an all-equal
    frequency column is returned as a degenerate flat fit.
    """
    ranks = np.asarray([r for r, _f in ranked], dtype=float)
    freqs = np.asarray([f for _r, f in ranked], dtype=float)
    if len(ranks) < 4:
        raise ValueError(f"Zipf fit needs at least 4 points, got {len(ranks)}")
    if np.any(freqs < 1):
        raise ValueError("Zipf fit needs all frequencies >= 1")

    y = np.log(freqs)
    if np.all(freqs == freqs[0]):
        return ZipfFit(a=float(y[0]), b=0.0, c=0.0, residual=0.0, iterations=0, degenerate=True)

    def solve(c):
        x = np.log(ranks + c)
        xm = x.mean()
        ym = y.mean()
        var = float(np.dot(x - xm, x - xm))
        slope = float(np.dot(x - xm, y - ym)) / var
        a = ym - slope * xm
        resid = y - (a + slope * x)
        return a, -slope, float(np.dot(resid, resid))

    lo = -0.99
    hi = 10.0 * len(ranks)
    m1 = hi - _INVPHI * (hi - lo)
    m2 = lo + _INVPHI * (hi - lo)
    f1 = solve(m1)[2]
    f2 = solve(m2)[2]
    iterations = 0
    while hi - lo > tolerance:
        iterations += 1
        if f1 <= f2:
            hi, m2, f2 = m2, m1, f1
            m1 = hi - _INVPHI * (hi - lo)
            f1 = solve(m1)[2]
        else:
            lo, m1, f1 = m1, m2, f2
            m2 = lo + _INVPHI * (hi - lo)
            f2 = solve(m2)[2]

    c = (lo + hi) / 2.0
    a, b, residual = solve(c)
    return ZipfFit(a=a, b=b, c=c, residual=residual, iterations=iterations)


def zipf_frequencies(a: float, b: float, c: float, num_ranks: int) -> np.ndarray:
    """Forward-generate f_r = exp(a - b*log(r + c)) for r = 1..num_ranks."""
    ranks = np.arange(1, num_ranks + 1, dtype=float)
    return np.exp(a - b * np.log(ranks + c))
