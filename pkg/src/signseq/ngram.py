"""Order-n token models with boundary handling, smoothing, and scoring.

Every text ``s_1..s_N`` is counted as ``<s> s_1..s_N </s>`` with a single
start token and a single end token; all m-grams for m <= n are pooled
position-independently.  Internally the follower space is indexed 0..V
where slot 0 is the end token and slots 1..V are sign ids; the start token
(-1) only ever appears in histories.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from collections import Counter

import numpy as np

from dataclasses import dataclass

from .corpus import GAP, Corpus

END = 0
START = -1

SMOOTHINGS = ("mle", "add_one", "witten_bell", "katz")

MODEL_FORMAT = "signseq-model"
MODEL_VERSION = 1


class ModelError(ValueError):
    """Invalid model configuration or misuse of a trained model."""


class UnseenHistoryError(ModelError):
    """MLE conditional requested for a history never observed in training."""


class ModelFormatError(ValueError):
    """Serialized model stream is malformed, truncated, or corrupted."""


@dataclass(frozen=True)
class ModelConfig:
    order: int = 2
    smoothing: str = "witten_bell"
    vocabulary_size: int = 417
    katz_gt_threshold: int = 5
    katz_fallback_discount: float = 0.5

    def __post_init__(self):
        if not 1 <= self.order <= 5:
            raise ModelError(f"order must be in [1, 5], got {self.order}")
        if self.smoothing not in SMOOTHINGS:
            raise ModelError(f"unknown smoothing {self.smoothing!r}")
        if self.vocabulary_size < 1:
            raise ModelError("vocabulary_size must be positive")
        if self.katz_gt_threshold < 1:
            raise ModelError("katz_gt_threshold must be >= 1")
        if not 0.0 < self.katz_fallback_discount < 1.0:
            raise ModelError("katz_fallback_discount must be in (0, 1)")

    @property
    def smoothed(self) -> bool:
        return self.smoothing != "mle"


class NgramCounts:
    """Follower counts keyed by history tuple, for histories of length < n."""

    def __init__(self, order: int, vocabulary_size: int):
        self.order = order
        self.vocabulary_size = vocabulary_size
        self.num_texts = 0
        self.by_history: dict[tuple[int, ...], Counter] = {}

    def add_text(self, tokens) -> None:
        seq = (START,) + tuple(tokens) + (END,)
        table = self.by_history
        order = self.order
        for i in range(1, len(seq)):
            follower = seq[i]
            for m in range(1, order + 1):
                lo = i - (m - 1)
                if lo < 0:
                    break
                history = seq[lo:i]
                counter = table.get(history)
                if counter is None:
                    counter = Counter()
                    table[history] = counter
                counter[follower] += 1
        self.num_texts += 1

    def followers(self, history) -> Counter | None:
        return self.by_history.get(tuple(history))

    def count_of_counts(self, gram_length: int) -> Counter:
        """N_r over all grams of the given length (history length + 1)."""
        coc = Counter()
        for history, followers in self.by_history.items():
            if len(history) == gram_length - 1:
                for count in followers.values():
                    coc[count] += 1
        return coc


def count_ngrams(corpus: Corpus, order: int) -> NgramCounts:
    """Count all m-grams for m <= order over boundary-augmented texts."""
    if order < 1:
        raise ModelError(f"order must be >= 1, got {order}")
    counts = NgramCounts(order, corpus.vocabulary_size)
    for text in corpus.texts:
        if GAP in text.tokens:
            raise ValueError(
                "cannot count a damaged text; restore or drop gapped texts first"
            )
        counts.add_text(text.tokens)
    return counts


class NgramModel:
    """Immutable trained model; conditional rows are cached on first use.

    Safe to share across concurrent readers: caches are plain dicts mutated
    only with freshly computed, idempotent values.
    """

    def __init__(self, counts: NgramCounts, config: ModelConfig, corpus_label: str = ""):
        if counts.vocabulary_size != config.vocabulary_size:
            raise ModelError("counts and config disagree on vocabulary size")
        if counts.order < config.order:
            raise ModelError("counts were collected at a lower order than the config")
        self.counts = counts
        self.config = config
        self.corpus_label = corpus_label
        self._dist_cache: dict[tuple[int, ...], np.ndarray] = {}
        self._log_cache: dict[tuple[int, ...], np.ndarray] = {}
        self._cum_cache: dict[tuple[int, ...], np.ndarray] = {}
        self._gt_cache: dict[int, dict[int, float] | None] = {}

    @classmethod
    def train(cls, corpus: Corpus, config: ModelConfig) -> "NgramModel":
        return cls(count_ngrams(corpus, config.order), config, corpus_label=corpus.label)

    @property
    def order(self) -> int:
        return self.config.order

    @property
    def vocabulary_size(self) -> int:
        return self.config.vocabulary_size

    # -- conditional distributions ----------------------------------------

    def _truncate(self, history) -> tuple[int, ...]:
        history = tuple(history)
        keep = self.config.order - 1
        if len(history) > keep:
            return history[len(history) - keep:]
        return history

    def distribution(self, history=()) -> np.ndarray:
        """P(follower | history) over slots 0..V (slot 0 = end token).

        The history is truncated to the model order.  Smoothed models return
        strictly positive rows summing to 1; MLE rows may contain zeros and
        raise :class:`UnseenHistoryError` for unobserved histories.
        """
        history = self._truncate(history)
        cached = self._dist_cache.get(history)
        if cached is None:
            cached = self._compute_distribution(history)
            cached.setflags(write=False)
            self._dist_cache[history] = cached
        return cached

    def log_distribution(self, history=()) -> np.ndarray:
        history = self._truncate(history)
        cached = self._log_cache.get(history)
        if cached is None:
            with np.errstate(divide="ignore"):
                cached = np.log2(self.distribution(history))
            cached.setflags(write=False)
            self._log_cache[history] = cached
        return cached

    def _compute_distribution(self, history) -> np.ndarray:
        smoothing = self.config.smoothing
        if smoothing == "mle":
            return self._mle(history)
        if smoothing == "add_one":
            return self._add_one(history)
        if smoothing == "witten_bell":
            return self._witten_bell(history)
        return self._katz(history)

    def _follower_array(self, history) -> tuple[np.ndarray, int]:
        arr = np.zeros(self.vocabulary_size + 1)
        followers = self.counts.followers(history)
        total = 0
        if followers:
            for token, count in followers.items():
                arr[token] = count
                total += count
        return arr, total

    def _mle(self, history) -> np.ndarray:
        arr, total = self._follower_array(history)
        if total == 0:
            raise UnseenHistoryError(f"history {history} never observed; MLE undefined")
        return arr / total

    def _add_one(self, history) -> np.ndarray:
        arr, total = self._follower_array(history)
        return (arr + 1.0) / (total + self.vocabulary_size + 1)

    def _witten_bell(self, history) -> np.ndarray:
        # Base case: the unigram is add-one smoothed over the V+1 followers.
        if len(history) == 0:
            return self._add_one(())
        followers = self.counts.followers(history)
        if not followers:
            return self.distribution(history[1:])
        arr, total = self._follower_array(history)
        types = len(followers)
        unseen_types = (self.vocabulary_size + 1) - types
        if unseen_types == 0:
            return arr / total  # every follower observed: renormalizes to MLE
        denom = total + types
        out = arr / denom
        out[arr == 0] = types / (unseen_types * denom)
        return out

    def _katz(self, history) -> np.ndarray:
        if len(history) == 0:
            return self._add_one(())
        followers = self.counts.followers(history)
        if not followers:
            return self.distribution(history[1:])

        arr, total = self._follower_array(history)
        seen = arr > 0
        if seen.all():
            return arr / total  # no unseen followers, so no mass to reserve

        k = self.config.katz_gt_threshold
        discount_d = self.config.katz_fallback_discount
        discounts = self._gt_discounts(len(history) + 1)

        pstar = np.zeros_like(arr)
        if discounts is None:
            pstar[seen] = (arr[seen] - discount_d) / total
        else:
            adjusted = arr[seen].copy()
            for i, r in enumerate(adjusted):
                if r <= k:
                    adjusted[i] = discounts[int(r)]
            pstar[seen] = adjusted / total

        leftover = 1.0 - pstar.sum()
        if leftover < 1e-12:
            # No usable mass freed (e.g. every count above the threshold) but
            # unseen followers exist; absolute discounting keeps the chain ergodic.
            pstar[seen] = (arr[seen] - discount_d) / total
            leftover = 1.0 - pstar.sum()
        lower = self.distribution(history[1:])
        unseen_lower = lower[~seen].sum()
        pstar[~seen] = (leftover / unseen_lower) * lower[~seen]
        return pstar

    def _gt_discounts(self, gram_length: int) -> dict[int, float] | None:
        """Good-Turing discounted counts r -> r* for r <= k, or None to fall back.

        Falls back when any required count-of-counts is zero, a discount is
        non-positive, fails to remove mass (r* >= r), or the sequence is
        non-monotone in r.
        """
        if gram_length in self._gt_cache:
            return self._gt_cache[gram_length]
        k = self.config.katz_gt_threshold
        coc = self.counts.count_of_counts(gram_length)
        discounts: dict[int, float] | None = {}
        previous = 0.0
        for r in range(1, k + 1):
            if coc[r] == 0 or coc[r + 1] == 0:
                discounts = None
                break
            rstar = (r + 1) * coc[r + 1] / coc[r]
            if rstar <= 0.0 or rstar >= r or rstar < previous:
                discounts = None
                break
            discounts[r] = rstar
            previous = rstar
        self._gt_cache[gram_length] = discounts
        return discounts

    # -- scoring ------------------------------------------------------------

    def sequence_log_prob(self, tokens, *, include_end: bool = True,
                          boundary_free: bool = False) -> float:
        """Sum of log2 conditional probabilities over a complete text.

        The default scores every sign against its boundary-augmented
        truncated history plus the end-token event.  ``include_end=False``
        drops the end event and renormalizes each conditional over sign
        followers only.  ``boundary_free=True`` additionally drops the start
        context; for an order-1 model that is the plain product of
        individual sign probabilities.  A zero-probability step under MLE
        yields ``-inf`` (never an underflow: summation stays in log space).
        """
        tokens = tuple(tokens)
        if not tokens:
            raise ValueError("cannot score an empty text")
        if GAP in tokens:
            raise ValueError("cannot score a text containing gaps")
        for token in tokens:
            if not 1 <= token <= self.vocabulary_size:
                raise ValueError(f"token {token} outside vocabulary")

        if boundary_free:
            seq = tokens
            first = 0
            score_end = False
        else:
            seq = (START,) + tokens
            first = 1
            score_end = include_end

        window = self.config.order - 1
        renormalize = not score_end
        total = 0.0
        for i in range(first, len(seq)):
            history = seq[max(0, i - window):i]
            try:
                dist = self.distribution(history)
            except UnseenHistoryError:
                return float("-inf")  # a previous step already had probability 0
            p = float(dist[seq[i]])
            if p <= 0.0:
                return float("-inf")
            if renormalize:
                p /= 1.0 - float(dist[END])
            total += math.log2(p)
        if score_end:
            history = seq[max(0, len(seq) - window):]
            try:
                total += float(self.log_distribution(history)[END])
            except UnseenHistoryError:
                return float("-inf")
        return total

    def corpus_log_prob(self, corpus: Corpus, **kwargs) -> float:
        return sum(self.sequence_log_prob(t.tokens, **kwargs) for t in corpus.texts)

    # -- generation ----------------------------------------------------------

    def generate(self, seed: int, max_len: int) -> tuple[int, ...]:
        """Sample one text; deterministic and platform-stable for a given seed.

        Inverse-CDF sampling walks followers ordered by sign id with the end
        token last.  Stops when the end token is drawn or max_len signs are
        out; drawing the end token immediately yields an empty text.
        """
        if max_len < 1:
            raise ValueError(f"max_len must be >= 1, got {max_len}")
        if not self.config.smoothed:
            raise ModelError("generation needs a smoothed model")
        rng = random.Random(seed)
        window = self.config.order - 1
        history: tuple[int, ...] = (START,)
        emitted: list[int] = []
        while True:
            cum = self._generation_cdf(history)
            idx = int(np.searchsorted(cum, rng.random(), side="right"))
            if idx >= self.vocabulary_size:
                break
            sign = idx + 1
            emitted.append(sign)
            if len(emitted) >= max_len:
                break
            history = (history + (sign,))[-window:] if window else ()
        return tuple(emitted)

    def _generation_cdf(self, history) -> np.ndarray:
        history = self._truncate(history)
        cached = self._cum_cache.get(history)
        if cached is None:
            dist = self.distribution(history)
            cached = np.cumsum(np.concatenate([dist[1:], dist[:1]]))
            cached.setflags(write=False)
            self._cum_cache[history] = cached
        return cached

    # -- matrices --------------------------------------------------------------

    def bigram_matrix(self) -> np.ndarray:
        """Rows a=1..V of P(follower | a); column 0 is the end token."""
        if self.config.order < 2:
            raise ModelError("bigram matrix needs a model of order >= 2")
        v = self.vocabulary_size
        matrix = np.empty((v, v + 1))
        for a in range(1, v + 1):
            matrix[a - 1] = self.distribution((a,))
        return matrix

    def independence_reference(self) -> np.ndarray:
        """No-correlation reference: every row equals the unigram distribution."""
        row = self.distribution(())
        return np.tile(row, (self.vocabulary_size, 1))


# -- serialization -------------------------------------------------------------


def _canonical_payload(model: NgramModel) -> dict:
    counts = {}
    for history in sorted(model.counts.by_history, key=lambda h: (len(h), h)):
        followers = model.counts.by_history[history]
        key = " ".join(str(t) for t in history)
        counts[key] = {str(tok): followers[tok] for tok in sorted(followers)}
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config": {
            "order": model.config.order,
            "smoothing": model.config.smoothing,
            "vocabulary_size": model.config.vocabulary_size,
            "katz_gt_threshold": model.config.katz_gt_threshold,
            "katz_fallback_discount": model.config.katz_fallback_discount,
        },
        "corpus_label": model.corpus_label,
        "counts_order": model.counts.order,
        "num_texts": model.counts.num_texts,
        "counts": counts,
    }


def save_model(model: NgramModel) -> bytes:
    """Canonical JSON with a sha256 checksum; probabilities are derived on load."""
    payload = _canonical_payload(model)
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    checksum = hashlib.sha256(body.encode("utf-8")).hexdigest()
    envelope = {"checksum": checksum, "payload": payload}
    return json.dumps(envelope, sort_keys=True, separators=(",", ":")).encode("utf-8")


def load_model(data: bytes) -> NgramModel:
    try:
        envelope = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"not a valid model stream: {exc}") from None
    if not isinstance(envelope, dict) or "payload" not in envelope or "checksum" not in envelope:
        raise ModelFormatError("model stream missing payload or checksum")
    payload = envelope["payload"]
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    checksum = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if checksum != envelope["checksum"]:
        raise ModelFormatError("model checksum mismatch")
    if payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"unknown model format {payload.get('format')!r}")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {payload.get('version')!r}")

    config = ModelConfig(**payload["config"])
    counts = NgramCounts(payload["counts_order"], config.vocabulary_size)
    counts.num_texts = payload["num_texts"]
    for key, followers in payload["counts"].items():
        history = tuple(int(t) for t in key.split()) if key else ()
        counts.by_history[history] = Counter(
            {int(tok): int(count) for tok, count in followers.items()}
        )
    return NgramModel(counts, config, corpus_label=payload.get("corpus_label", ""))


def save_model_file(model: NgramModel, path) -> None:
    with open(path, "wb") as handle:
        handle.write(save_model(model))


def load_model_file(path) -> NgramModel:
    with open(path, "rb") as handle:
        return load_model(handle.read())
