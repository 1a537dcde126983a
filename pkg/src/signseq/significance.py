"""Log-likelihood ratio (G-squared) association test for adjacent sign pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ngram import END, START, NgramCounts


@dataclass(frozen=True)
class SignificancePair:
    pair: tuple[int, int]
    observed_count: int
    ll_value: float
    frequency_rank: int
    ll_rank: int


def _pair_table(counts: NgramCounts, include_boundaries: bool):
    """Adjacent-pair counts with row/column totals over the chosen event universe."""
    if counts.order < 2:
        raise ValueError("pair statistics need bigram-level counts (order >= 2)")
    pairs: dict[tuple[int, int], int] = {}
    row_totals: dict[int, int] = {}
    col_totals: dict[int, int] = {}
    total = 0
    for history, followers in counts.by_history.items():
        if len(history) != 1:
            continue
        a = history[0]
        if a == START and not include_boundaries:
            continue
        for b, count in followers.items():
            if b == END and not include_boundaries:
                continue
            pairs[(a, b)] = pairs.get((a, b), 0) + count
            row_totals[a] = row_totals.get(a, 0) + count
            col_totals[b] = col_totals.get(b, 0) + count
            total += count
    return pairs, row_totals, col_totals, total


def _g_squared(k11: int, k12: int, k21: int, k22: int) -> float:
    """Dunning's G^2 = 2 * sum k * ln(k/E) over the 2x2 table (natural log)."""
    if min(k11, k12, k21, k22) < 0:
        raise ValueError("inconsistent counts produced a negative contingency cell")
    n = k11 + k12 + k21 + k22
    if n == 0:
        raise ValueError("empty contingency table")
    rows = (k11 + k12, k21 + k22)
    cols = (k11 + k21, k12 + k22)
    value = 0.0
    for k, row, col in (
        (k11, rows[0], cols[0]),
        (k12, rows[0], cols[1]),
        (k21, rows[1], cols[0]),
        (k22, rows[1], cols[1]),
    ):
        if k > 0:
            value += k * math.log(k * n / (row * col))
    value *= 2.0
    if -1e-9 < value < 0.0:
        value = 0.0
    return value


def loglikelihood_pair(counts: NgramCounts, a: int, b: int, *,
                       include_boundaries: bool = False) -> float:
    """G^2 statistic testing independence of sign b following sign a.

    The event universe is adjacent sign pairs; boundary transitions are
    excluded unless ``include_boundaries`` is set.
    """
    pairs, row_totals, col_totals, total = _pair_table(counts, include_boundaries)
    k11 = pairs.get((a, b), 0)
    k12 = row_totals.get(a, 0) - k11
    k21 = col_totals.get(b, 0) - k11
    k22 = total - k11 - k12 - k21
    return _g_squared(k11, k12, k21, k22)


def rank_significant_pairs(counts: NgramCounts, top_k: int, *,
                           include_boundaries: bool = False) -> list[SignificancePair]:
    """Observed pairs ordered by G^2; each record carries both rank systems.

    Ties break by higher count, then ascending pair ids, so listings are
    deterministic.  Returns all pairs when top_k exceeds the pair count.
    """
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    pairs, row_totals, col_totals, total = _pair_table(counts, include_boundaries)

    scored = []
    for (a, b), count in pairs.items():
        k11 = count
        k12 = row_totals[a] - k11
        k21 = col_totals[b] - k11
        k22 = total - k11 - k12 - k21
        scored.append(((a, b), count, _g_squared(k11, k12, k21, k22)))

    by_frequency = sorted(scored, key=lambda item: (-item[1], item[0]))
    frequency_rank = {item[0]: rank for rank, item in enumerate(by_frequency, start=1)}
    by_ll = sorted(scored, key=lambda item: (-item[2], -item[1], item[0]))

    results = []
    for rank, (pair, count, ll) in enumerate(by_ll[:top_k], start=1):
        results.append(
            SignificancePair(
                pair=pair,
                observed_count=count,
                ll_value=ll,
                frequency_rank=frequency_rank[pair],
                ll_rank=rank,
            )
        )
    return results
