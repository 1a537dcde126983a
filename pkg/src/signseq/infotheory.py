"""Entropy, mutual information, cross-entropy, and perplexity measures."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, EmptyCorpusError
from .ngram import END, START, NgramModel
from .stats import unigram_frequencies

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EntropyReport:
    entropy_bits: float
    mutual_information_bits: float
    token_count: int


@dataclass(frozen=True)
class PerplexityReport:
    order: int
    cross_entropy_bits_per_token: float
    perplexity: float
    held_out_token_count: int


def _as_probability_array(dist) -> np.ndarray:
    if isinstance(dist, dict):
        values = np.asarray(list(dist.values()), dtype=float)
    else:
        values = np.asarray(dist, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("empty probability distribution")
    if np.any(values < 0):
        raise ValueError("negative probability in distribution")
    total = values.sum()
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise ValueError(f"probabilities sum to {total}, outside tolerance")
    return values


def entropy(dist) -> float:
    """Shannon entropy in bits, with 0*log(0) = 0."""
    p = _as_probability_array(dist)
    nonzero = p[p > 0]
    return float(-(nonzero * np.log2(nonzero)).sum())


def mutual_information(joint) -> float:
    """Mutual information in bits of a joint over pairs, marginals from the joint.

    Accepts a mapping (a, b) -> probability or a 2-D array.  Zero cells
    contribute nothing; tiny negative float residue is clamped to 0.
    """
    if isinstance(joint, dict):
        lefts = sorted({a for a, _b in joint})
        rights = sorted({b for _a, b in joint})
        grid = np.zeros((len(lefts), len(rights)))
        li = {a: i for i, a in enumerate(lefts)}
        ri = {b: i for i, b in enumerate(rights)}
        for (a, b), p in joint.items():
            grid[li[a], ri[b]] = p
    else:
        grid = np.asarray(joint, dtype=float)
        if grid.ndim != 2:
            raise ValueError("joint distribution must be two-dimensional")
    _as_probability_array(grid)

    left = grid.sum(axis=1)
    right = grid.sum(axis=0)
    outer = np.outer(left, right)
    mask = grid > 0
    value = float((grid[mask] * np.log2(grid[mask] / outer[mask])).sum())
    if -SUM_TOLERANCE < value < 0.0:
        value = 0.0
    return value


def corpus_entropy_mi(corpus: Corpus, *, include_boundaries: bool = False) -> EntropyReport:
    """Unigram entropy plus adjacent-pair mutual information for a clean corpus.

    Boundary tokens are excluded by default; ``include_boundaries=True`` adds
    (start, first-sign) and (last-sign, end) pairs for sensitivity checks.
    """
    table = unigram_frequencies(corpus)
    if table.total == 0:
        raise EmptyCorpusError("corpus has no sign tokens")
    probs = {sign: count / table.total for sign, count in table.counts.items()}

    pairs = Counter()
    for text in corpus.texts:
        if text.damaged:
            raise ValueError("entropy/MI need an undamaged corpus")
        tokens = text.tokens
        if include_boundaries:
            tokens = (START,) + tokens + (END,)
        for a, b in zip(tokens, tokens[1:]):
            pairs[(a, b)] += 1
    if not pairs:
        raise ValueError("no adjacent sign pairs; mutual information undefined")
    total_pairs = sum(pairs.values())
    joint = {pair: count / total_pairs for pair, count in pairs.items()}

    return EntropyReport(
        entropy_bits=entropy(probs),
        mutual_information_bits=mutual_information(joint),
        token_count=table.total,
    )


def cross_entropy_perplexity(model: NgramModel, held_out: Corpus, *,
                             include_end: bool = True) -> PerplexityReport:
    """Per-event cross-entropy of the model on a held-out corpus, and 2**H.

    Events are every sign prediction plus, by default, each text's end
    token; ``include_end=False`` drops end events and renormalizes the
    conditionals over sign followers.
    """
    if not held_out.texts:
        raise EmptyCorpusError("held-out corpus is empty")
    events = 0
    total = 0.0
    for text in held_out.texts:
        total += model.sequence_log_prob(text.tokens, include_end=include_end)
        events += len(text.tokens) + (1 if include_end else 0)
    if events == 0:
        raise EmptyCorpusError("held-out corpus has no prediction events")
    cross = -total / events
    return PerplexityReport(
        order=model.order,
        cross_entropy_bits_per_token=cross,
        perplexity=2.0 ** cross,
        held_out_token_count=events,
    )


def perplexity_sweep(train: Corpus, held_out: Corpus, orders, *,
                     smoothing: str = "witten_bell", include_end: bool = True,
                     katz_gt_threshold: int = 5,
                     katz_fallback_discount: float = 0.5) -> list[PerplexityReport]:
    """Train one model per order on the same split and evaluate each."""
    from .ngram import ModelConfig

    reports = []
    for order in orders:
        config = ModelConfig(
            order=order,
            smoothing=smoothing,
            vocabulary_size=train.vocabulary_size,
            katz_gt_threshold=katz_gt_threshold,
            katz_fallback_discount=katz_fallback_discount,
        )
        model = NgramModel.train(train, config)
        reports.append(cross_entropy_perplexity(model, held_out, include_end=include_end))
    return reports
