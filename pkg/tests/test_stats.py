import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_corpus
from signseq.corpus import EmptyCorpusError, parse_corpus
from signseq.stats import (
    FrequencyTable,
    cumulative_coverage,
    fit_zipf_mandelbrot,
    positional_frequencies,
    rank_frequency,
    rank_table_rows,
    unigram_frequencies,
    zipf_frequencies,
)


class TestFrequencies:
    def test_basic_counts(self):
        table = unigram_frequencies(make_corpus([[1, 2], [1]], 5))
        assert table.counts == {1: 2, 2: 1}
        assert table.total == 3

    def test_single_text(self):
        table = unigram_frequencies(make_corpus([[5]], 5))
        assert table.counts == {5: 1}
        assert table.total == 1

    def test_gaps_excluded(self):
        table = unigram_frequencies(parse_corpus("1 ? 2\n", 5))
        assert table.counts == {1: 1, 2: 1}

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            unigram_frequencies(make_corpus([], 5))


class TestRankFrequency:
    def test_tie_break_by_sign_id(self):
        table = FrequencyTable({1: 5, 2: 5, 3: 1}, 11)
        assert rank_frequency(table) == [(1, 1, 5), (2, 2, 5), (3, 3, 1)]

    def test_singleton(self):
        assert rank_frequency(FrequencyTable({7: 9}, 9)) == [(1, 7, 9)]

    def test_zipf_law_sample_is_monotone(self):
        # forward-generate counts from f = 64/r and confirm rank order recovers it
        freqs = [round(64 / r) for r in range(1, 33)]
        counts = {sign: max(1, f) for sign, f in enumerate(freqs, start=1)}
        ranked = rank_frequency(FrequencyTable(counts, sum(counts.values())))
        values = [f for _r, _s, f in ranked]
        assert values == sorted(values, reverse=True)
        assert values[0] == 64

    def test_rows_include_probability_and_cumulative(self):
        table = FrequencyTable({1: 3, 2: 1}, 4)
        rows = list(rank_table_rows(table))
        assert rows[0] == (1, 1, 3, 0.75, 0.75)
        assert rows[1] == (2, 2, 1, 0.25, 1.0)


class TestCumulativeCoverage:
    def test_uniform(self):
        table = FrequencyTable({s: 10 for s in range(1, 11)}, 100)
        assert cumulative_coverage(table, 0.8) == 8

    def test_skewed(self):
        assert cumulative_coverage(FrequencyTable({1: 9, 2: 1}, 10), 0.9) == 1

    def test_full_fraction_counts_distinct_nonzero(self):
        table = FrequencyTable({1: 3, 2: 1, 3: 0}, 4)
        assert cumulative_coverage(table, 1.0) == 2

    @settings(max_examples=50, deadline=None)
    @given(st.dictionaries(st.integers(1, 30), st.integers(1, 50), min_size=1))
    def test_nondecreasing_in_fraction(self, counts):
        table = FrequencyTable(counts, sum(counts.values()))
        ks = [cumulative_coverage(table, f) for f in (0.1, 0.3, 0.5, 0.8, 0.95, 1.0)]
        assert ks == sorted(ks)

    def test_fraction_bounds(self):
        table = FrequencyTable({1: 1}, 1)
        with pytest.raises(ValueError):
            cumulative_coverage(table, 0.0)
        with pytest.raises(ValueError):
            cumulative_coverage(table, 1.5)


class TestPositional:
    def test_beginners_and_enders(self):
        corpus = make_corpus([[1, 2, 3], [1, 9]], 10)
        assert positional_frequencies(corpus, "beginner").counts == {1: 2}
        assert positional_frequencies(corpus, "ender").counts == {3: 1, 9: 1}

    def test_length_one_counts_both_ways(self):
        corpus = make_corpus([[7]], 10)
        assert positional_frequencies(corpus, "beginner").counts == {7: 1}
        assert positional_frequencies(corpus, "ender").counts == {7: 1}

    def test_totals_equal_text_count(self):
        corpus = make_corpus([[1, 2, 3], [4], [5, 6]], 10)
        assert positional_frequencies(corpus, "beginner").total == 3
        assert positional_frequencies(corpus, "ender").total == 3

    def test_damaged_rejected(self):
        with pytest.raises(ValueError, match="undamaged"):
            positional_frequencies(parse_corpus("1 ?\n", 5), "ender")

    def test_unknown_position(self):
        with pytest.raises(ValueError):
            positional_frequencies(make_corpus([[1]], 5), "middle")


class TestZipfFit:
    def test_recovers_pure_zipf(self):
        # f_r = 64/r is the law with b=1, c=0
        points = [(r, 64.0 / r) for r in range(1, 41)]
        fit = fit_zipf_mandelbrot(points)
        assert abs(fit.b - 1.0) < 1e-3
        assert abs(fit.c - 0.0) < 1e-3
        assert abs(fit.a - math.log(64.0)) < 1e-3

    def test_noise_free_reference_parameters(self):
        # the un-rounded law drops below frequency 1 past rank 336, so the
        # noise-free check uses the longest prefix meeting the precondition
        a, b, c = 15.39, 2.59, 44.47
        freqs = zipf_frequencies(a, b, c, 336)
        fit = fit_zipf_mandelbrot(list(zip(range(1, 337), freqs)))
        assert fit.residual < 1e-10
        assert abs(fit.a - a) / a < 0.05
        assert abs(fit.b - b) / b < 0.05
        assert abs(fit.c - c) / c < 0.05

    def test_rounded_reference_parameters_within_5_percent(self):
        a, b, c = 15.39, 2.59, 44.47
        freqs = np.clip(np.rint(zipf_frequencies(a, b, c, 377)), 1, None)
        fit = fit_zipf_mandelbrot(list(zip(range(1, 378), freqs)))
        assert abs(fit.a - a) / a < 0.05
        assert abs(fit.b - b) / b < 0.05
        assert abs(fit.c - c) / c < 0.05

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="at least 4"):
            fit_zipf_mandelbrot([(1, 9.0), (2, 5.0), (3, 2.0)])

    def test_frequency_below_one_rejected(self):
        with pytest.raises(ValueError, match=">= 1"):
            fit_zipf_mandelbrot([(1, 9.0), (2, 5.0), (3, 2.0), (4, 0.5)])

    def test_degenerate_flat_frequencies(self):
        fit = fit_zipf_mandelbrot([(r, 7.0) for r in range(1, 9)])
        assert fit.degenerate
        assert fit.b == 0.0
        assert fit.residual == 0.0
