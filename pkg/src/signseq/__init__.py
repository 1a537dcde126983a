"""Statistical toolkit for corpora of short integer-coded sign sequences.

Builds smoothed n-gram Markov chain models over cleaned corpora and layers
descriptive statistics, association tests, information measures, gap
restoration, and cross-validated sensitivity evaluation on top of them.
"""

from .corpus import (
    GAP,
    CleanReport,
    Corpus,
    CorpusFormatError,
    EmptyCorpusError,
    Text,
    build_ebuds,
    clean_report,
    length_histogram,
    load_corpus,
    parse_corpus,
    reverse_texts,
    save_corpus,
    serialize_corpus,
)
from .crossval import (
    CrossValConfig,
    SensitivityReport,
    cross_validate,
    kfold_split,
    sensitivity_trial,
)
from .infotheory import (
    EntropyReport,
    PerplexityReport,
    corpus_entropy_mi,
    cross_entropy_perplexity,
    entropy,
    mutual_information,
    perplexity_sweep,
)
from .ngram import (
    END,
    START,
    ModelConfig,
    ModelError,
    ModelFormatError,
    NgramCounts,
    NgramModel,
    UnseenHistoryError,
    count_ngrams,
    load_model,
    load_model_file,
    save_model,
    save_model_file,
)
from .restore import (
    Assignment,
    RestorationResult,
    coverage_prefix,
    fill_gaps,
    gap_marginals,
    gap_positions,
    most_probable_text,
    restore_single_gap,
    viterbi_restore,
)
from .significance import (
    SignificancePair,
    loglikelihood_pair,
    rank_significant_pairs,
)
from .stats import (
    FrequencyTable,
    ZipfFit,
    cumulative_coverage,
    fit_zipf_mandelbrot,
    positional_frequencies,
    rank_frequency,
    unigram_frequencies,
    zipf_frequencies,
)

__version__ = "0.1.0"
