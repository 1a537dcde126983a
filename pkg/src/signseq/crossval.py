"""K-fold cross-validated restoration sensitivity (TP / (TP + FN)).

Each trial drops one uniformly random sign per test text, asks the model
for the gap posterior, and counts a true positive when the dropped sign
falls inside the smallest candidate set holding the configured cumulative
probability.  Trials redraw drop positions only; the fold model is fixed.
"""

from __future__ import annotations

import random
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .corpus import GAP, Corpus
from .ngram import ModelConfig, NgramModel
from .restore import coverage_prefix, gap_marginals


@dataclass(frozen=True)
class TrialResult:
    true_positives: int
    false_negatives: int
    skipped: int

    @property
    def sensitivity(self) -> float:
        evaluated = self.true_positives + self.false_negatives
        if evaluated == 0:
            raise ValueError("no evaluable texts (all shorter than 2 signs)")
        return self.true_positives / evaluated


@dataclass(frozen=True)
class FoldResult:
    fold: int
    trials: int
    mean_sensitivity: float
    stdev_sensitivity: float
    sensitivities: tuple[float, ...]
    skipped_texts: int


@dataclass(frozen=True)
class SensitivityReport:
    folds: tuple[FoldResult, ...]
    overall_mean: float
    criterion_coverage: float
    trials_per_fold: int
    seed: int


@dataclass(frozen=True)
class CrossValConfig:
    k: int = 5
    coverage: float = 0.90
    trials_per_fold: int = 100
    seed: int = 0
    order: int = 2
    smoothing: str = "witten_bell"
    threads: int = 1


def kfold_split(corpus: Corpus, k: int, seed: int) -> list[tuple[Corpus, Corpus]]:
    """Deterministic shuffled partition into k near-equal (train, test) pairs."""
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if len(corpus.texts) < k:
        raise ValueError(f"corpus of {len(corpus.texts)} texts cannot be split {k} ways")
    texts = list(corpus.texts)
    random.Random(seed).shuffle(texts)

    base, extra = divmod(len(texts), k)
    parts = []
    cursor = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        parts.append(tuple(texts[cursor:cursor + size]))
        cursor += size

    pairs = []
    for i in range(k):
        train = tuple(t for j, part in enumerate(parts) if j != i for t in part)
        pairs.append(
            (
                Corpus(corpus.vocabulary_size, train, f"{corpus.label}-fold{i}-train"),
                Corpus(corpus.vocabulary_size, parts[i], f"{corpus.label}-fold{i}-test"),
            )
        )
    return pairs


def sensitivity_trial(model: NgramModel, test: Corpus, coverage: float, seed: int) -> TrialResult:
    """One pass over the test corpus with a fresh random drop position per text."""
    rng = random.Random(seed)
    tp = fn = skipped = 0
    for text in test.texts:
        if len(text.tokens) < 2:
            skipped += 1
            continue
        position = rng.randrange(len(text.tokens))
        truth = text.tokens[position]
        gapped = text.tokens[:position] + (GAP,) + text.tokens[position + 1:]
        marginal = gap_marginals(model, gapped)[position]
        if truth in coverage_prefix(marginal, coverage):
            tp += 1
        else:
            fn += 1
    return TrialResult(true_positives=tp, false_negatives=fn, skipped=skipped)


def cross_validate(corpus: Corpus, config: CrossValConfig = CrossValConfig()) -> SensitivityReport:
    """Run trials_per_fold sensitivity trials on each of k folds.

    Trial seeds are pre-drawn from the master seed, so reports are
    bit-identical for a fixed seed regardless of thread count.
    """
    if config.trials_per_fold < 1:
        raise ValueError("trials_per_fold must be >= 1")
    if config.order != 2:
        raise ValueError("sensitivity trials run on the order-2 restoration lattice")
    pairs = kfold_split(corpus, config.k, config.seed)
    seeder = random.Random(config.seed)
    trial_seeds = [
        [seeder.randrange(2**32) for _ in range(config.trials_per_fold)]
        for _ in range(config.k)
    ]

    folds = []
    for i, (train, test) in enumerate(pairs):
        model_config = ModelConfig(
            order=config.order,
            smoothing=config.smoothing,
            vocabulary_size=corpus.vocabulary_size,
        )
        model = NgramModel.train(train, model_config)

        def run(seed: int) -> TrialResult:
            return sensitivity_trial(model, test, config.coverage, seed)

        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                results = list(pool.map(run, trial_seeds[i]))
        else:
            results = [run(seed) for seed in trial_seeds[i]]

        sensitivities = tuple(r.sensitivity for r in results)
        folds.append(
            FoldResult(
                fold=i,
                trials=len(results),
                mean_sensitivity=statistics.fmean(sensitivities),
                stdev_sensitivity=(
                    statistics.stdev(sensitivities) if len(sensitivities) > 1 else 0.0
                ),
                sensitivities=sensitivities,
                skipped_texts=results[0].skipped,
            )
        )

    overall = statistics.fmean(f.mean_sensitivity for f in folds)
    return SensitivityReport(
        folds=tuple(folds),
        overall_mean=overall,
        criterion_coverage=config.coverage,
        trials_per_fold=config.trials_per_fold,
        seed=config.seed,
    )
