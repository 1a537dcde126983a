"""Shared corpus builders and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
import random

import numpy as np

from signseq.corpus import Corpus, Text
from signseq.ngram import ModelConfig, NgramModel
from signseq.restore import fill_gaps, gap_positions


def make_corpus(texts, vocab: int, label: str = "corpus") -> Corpus:
    return Corpus(
        vocabulary_size=vocab,
        texts=tuple(Text(tokens=tuple(t)) for t in texts),
        label=label,
    )


def random_corpus(rng: random.Random, vocab: int, num_texts: int,
                  max_len: int = 8, label: str = "corpus") -> Corpus:
    texts = []
    for _ in range(num_texts):
        length = rng.randint(1, max_len)
        texts.append([rng.randint(1, vocab) for _ in range(length)])
    return make_corpus(texts, vocab, label)


def train(texts, vocab: int, order: int = 2, smoothing: str = "witten_bell",
          **kwargs) -> NgramModel:
    corpus = texts if isinstance(texts, Corpus) else make_corpus(texts, vocab)
    config = ModelConfig(order=order, smoothing=smoothing,
                         vocabulary_size=vocab, **kwargs)
    return NgramModel.train(corpus, config)


# -- brute-force restoration oracle -------------------------------------------


def brute_force_scores(model: NgramModel, tokens) -> dict[tuple[int, ...], float]:
    """Score every possible filling with the canonical sequence scorer."""
    gaps = gap_positions(tokens)
    signs = range(1, model.vocabulary_size + 1)
    return {
        filling: model.sequence_log_prob(fill_gaps(tokens, filling))
        for filling in itertools.product(signs, repeat=len(gaps))
    }


def brute_force_argmax(model: NgramModel, tokens):
    """(best score, set of score-tied argmax fillings)."""
    scores = brute_force_scores(model, tokens)
    best = max(scores.values())
    ties = {f for f, s in scores.items() if s >= best - 1e-9}
    return best, ties


def brute_force_marginals(model: NgramModel, tokens) -> dict[int, np.ndarray]:
    """Exact gap posteriors by enumeration, normalized in probability space."""
    gaps = gap_positions(tokens)
    scores = brute_force_scores(model, tokens)
    fillings = list(scores)
    logs = np.array([scores[f] for f in fillings])
    weights = np.exp2(logs - logs.max())
    weights /= weights.sum()

    out = {}
    for slot, position in enumerate(gaps):
        posterior = np.zeros(model.vocabulary_size + 1)
        for filling, weight in zip(fillings, weights):
            posterior[filling[slot]] += weight
        out[position] = posterior
    return out


# -- explicit-probability chain for generation/perplexity oracles ---------------


def integer_count_chain(rng: random.Random, vocab: int, *, min_end: int = 20,
                        scale: int = 400) -> NgramModel:
    """A known first-order chain: a Witten-Bell bigram model whose sign and
    end followers are all explicitly counted.

    With every sign-state follower observed, the smoothed rows reduce to
    exact count ratios, so the model's own conditionals are the chain's
    true transition probabilities.  ``min_end`` keeps every state's end
    probability comfortably positive so generated texts stay short.
    """
    from collections import Counter

    from signseq.ngram import END, START, NgramCounts

    counts = NgramCounts(order=2, vocabulary_size=vocab)
    for a in [START] + list(range(1, vocab + 1)):
        followers = Counter()
        for b in range(1, vocab + 1):
            followers[b] = rng.randint(1, scale)
        if a != START:
            followers[END] = rng.randint(min_end, scale)
        counts.by_history[(a,)] = followers
    unigram = Counter()
    for history, followers in counts.by_history.items():
        if history != (START,):
            unigram.update(followers)
    counts.by_history[()] = unigram
    counts.num_texts = unigram[END]
    config = ModelConfig(order=2, smoothing="witten_bell", vocabulary_size=vocab)
    return NgramModel(counts, config, corpus_label="synthetic-chain")


def chain_entropy_rate(model: NgramModel) -> float:
    """Analytic bits-per-event cross-entropy of a first-order chain on its
    own output, conditioned on texts being non-empty.

    Expected sign-state visit counts come from the fundamental matrix
    (I - Q)^-1 of the absorbing chain; each visit contributes the entropy
    of that state's conditional.  The first event is drawn from the
    end-renormalized start row but scored against the raw one, hence a
    cross-entropy term rather than an entropy.
    """
    from signseq.ngram import END, START

    v = model.vocabulary_size
    start = model.distribution((START,))
    rows = np.vstack([model.distribution((a,)) for a in range(1, v + 1)])

    first = start[1:] / (1.0 - start[END])
    transition = rows[:, 1:]  # sign -> sign
    visits = np.linalg.solve(np.eye(v) - transition.T, first)

    def row_entropy(row):
        nz = row[row > 0]
        return float(-(nz * np.log2(nz)).sum())

    expected_bits = float(-(first * np.log2(start[1:])).sum()) + sum(
        visits[a] * row_entropy(rows[a]) for a in range(v)
    )
    expected_events = 1.0 + visits.sum()
    return expected_bits / expected_events


def sample_corpus(model: NgramModel, num_texts: int, seed: int,
                  max_len: int = 10_000, label: str = "sampled") -> Corpus:
    texts = []
    for i in range(num_texts):
        tokens = model.generate(seed + i, max_len)
        if tokens:
            texts.append(tokens)
    return make_corpus(texts, model.vocabulary_size, label)
