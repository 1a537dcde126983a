import random

import pytest

from conftest import integer_count_chain, make_corpus, sample_corpus, train
from signseq.crossval import (
    CrossValConfig,
    TrialResult,
    cross_validate,
    kfold_split,
    sensitivity_trial,
)


class TestKfoldSplit:
    def test_equal_parts(self):
        corpus = make_corpus([[i, i] for i in range(1, 11)], 12)
        pairs = kfold_split(corpus, 5, seed=3)
        assert len(pairs) == 5
        for train_part, test_part in pairs:
            assert len(test_part) == 2
            assert len(train_part) == 8

    def test_union_disjoint(self):
        corpus = make_corpus([[i] for i in range(1, 14)], 15)
        for train_part, test_part in kfold_split(corpus, 4, seed=1):
            combined = sorted(t.tokens for t in train_part.texts + test_part.texts)
            assert combined == sorted(t.tokens for t in corpus.texts)
            assert len(train_part) + len(test_part) == len(corpus)

    def test_near_equal_sizes(self):
        corpus = make_corpus([[i] for i in range(1, 14)], 15)
        sizes = [len(test) for _train, test in kfold_split(corpus, 4, seed=1)]
        assert max(sizes) - min(sizes) <= 1

    def test_same_seed_same_split(self):
        corpus = make_corpus([[i, 1] for i in range(1, 21)], 25)
        first = kfold_split(corpus, 5, seed=9)
        second = kfold_split(corpus, 5, seed=9)
        assert first == second
        third = kfold_split(corpus, 5, seed=10)
        assert first != third

    def test_k_too_large(self):
        corpus = make_corpus([[1], [2]], 5)
        with pytest.raises(ValueError):
            kfold_split(corpus, 3, seed=0)


class TestSensitivityTrial:
    def test_sensitivity_arithmetic(self):
        assert TrialResult(74, 26, 0).sensitivity == pytest.approx(0.74)

    def test_full_coverage_is_always_right(self):
        rng = random.Random(2)
        chain = integer_count_chain(rng, 6)
        test = sample_corpus(chain, 40, seed=5)
        model = train(test, 6)
        result = sensitivity_trial(model, test, coverage=1.0, seed=0)
        assert result.false_negatives == 0
        assert result.sensitivity == 1.0

    def test_tp_fn_account_for_all_evaluable_texts(self):
        corpus = make_corpus([[1, 2], [2, 1], [1], [2]], 4)
        model = train(corpus, 4)
        result = sensitivity_trial(model, corpus, coverage=0.9, seed=1)
        assert result.skipped == 2
        assert result.true_positives + result.false_negatives == 2

    def test_dominant_successor_chain_beats_coverage(self):
        # every sign has a 0.95-probability successor, so the dropped sign
        # is almost always inside the 90% candidate set
        rng = random.Random(3)
        texts = []
        for i in range(300):
            start = rng.randint(1, 5)
            text = [start]
            for _ in range(3):
                nxt = text[-1] % 5 + 1
                if rng.random() > 0.95:
                    nxt = rng.randint(1, 5)
                text.append(nxt)
            texts.append(text)
        corpus = make_corpus(texts, 5)
        model = train(corpus, 5)
        result = sensitivity_trial(model, corpus, coverage=0.9, seed=4)
        assert result.sensitivity >= 0.9

    def test_monotone_in_coverage(self):
        rng = random.Random(6)
        chain = integer_count_chain(rng, 8)
        corpus = sample_corpus(chain, 100, seed=7)
        model = train(corpus, 8)
        rates = [
            sensitivity_trial(model, corpus, coverage=c, seed=11).sensitivity
            for c in (0.3, 0.5, 0.7, 0.9, 1.0)
        ]
        assert rates == sorted(rates)


class TestCrossValidate:
    def test_uniquely_recoverable_corpus_scores_one(self):
        corpus = make_corpus([[1, 2, 3]] * 30, 5)
        report = cross_validate(corpus, CrossValConfig(k=5, trials_per_fold=4, seed=2))
        assert report.overall_mean == 1.0
        for fold in report.folds:
            assert fold.mean_sensitivity == 1.0
            assert fold.stdev_sensitivity == 0.0

    def test_reports_reproducible(self):
        rng = random.Random(8)
        chain = integer_count_chain(rng, 6)
        corpus = sample_corpus(chain, 80, seed=9)
        config = CrossValConfig(k=4, trials_per_fold=3, seed=7)
        assert cross_validate(corpus, config) == cross_validate(corpus, config)

    def test_threads_do_not_change_the_report(self):
        rng = random.Random(10)
        chain = integer_count_chain(rng, 6)
        corpus = sample_corpus(chain, 60, seed=12)
        serial = cross_validate(corpus, CrossValConfig(k=3, trials_per_fold=4, seed=5))
        threaded = cross_validate(
            corpus, CrossValConfig(k=3, trials_per_fold=4, seed=5, threads=4)
        )
        assert serial == threaded

    def test_overall_mean_is_mean_of_fold_means(self):
        rng = random.Random(13)
        chain = integer_count_chain(rng, 6)
        corpus = sample_corpus(chain, 70, seed=14)
        report = cross_validate(corpus, CrossValConfig(k=3, trials_per_fold=3, seed=1))
        expected = sum(f.mean_sensitivity for f in report.folds) / len(report.folds)
        assert report.overall_mean == pytest.approx(expected)
