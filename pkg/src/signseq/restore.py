"""Probabilistic restoration of illegible positions in gapped texts.

A gapped text is a token tuple containing the reserved gap id.  Because a
first-order chain renders positions conditionally independent given fixed
signs between them, the restoration lattice factorizes into per-gap node
potentials, pairwise terms for directly adjacent gaps, and a constant for
events not touching any gap.  The same factor graph drives max-product
(Viterbi, with a k-best list extension) and sum-product (exact marginals).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import GAP
from .ngram import END, START, ModelError, NgramModel


@dataclass(frozen=True)
class Assignment:
    filling: tuple[int, ...]
    log_prob: float
    probability: float


@dataclass(frozen=True)
class RestorationResult:
    assignments: tuple[Assignment, ...]
    method: str
    gap_positions: tuple[int, ...]


def gap_positions(tokens) -> tuple[int, ...]:
    return tuple(i for i, t in enumerate(tokens) if t == GAP)


def fill_gaps(tokens, filling) -> tuple[int, ...]:
    """Substitute candidate signs (in gap order) into a gapped token tuple."""
    filling = list(filling)
    out = []
    for token in tokens:
        out.append(filling.pop(0) if token == GAP else token)
    if filling:
        raise ValueError("more filling signs than gaps")
    return tuple(out)


def _validate_gapped(model: NgramModel, tokens) -> tuple[int, ...]:
    tokens = tuple(tokens)
    if not tokens:
        raise ValueError("empty text")
    gaps = gap_positions(tokens)
    if not gaps:
        raise ValueError("text contains no gaps")
    for token in tokens:
        if token != GAP and not 1 <= token <= model.vocabulary_size:
            raise ValueError(f"sign id {token} outside vocabulary")
    if not model.config.smoothed:
        raise ModelError("restoration needs a smoothed model")
    return gaps


def _log2sumexp(values: np.ndarray, axis=None) -> np.ndarray | float:
    top = np.max(values, axis=axis, keepdims=axis is not None)
    out = top + np.log2(np.sum(np.exp2(values - top), axis=axis, keepdims=axis is not None))
    return out.squeeze(axis) if axis is not None else float(out)


class _GapLattice:
    """Factorized scoring lattice over the gaps of one text (order-2 models)."""

    def __init__(self, model: NgramModel, tokens):
        if model.order != 2:
            raise ModelError("gap lattice needs an order-2 model")
        self.model = model
        self.tokens = tuple(tokens)
        self.gaps = gap_positions(self.tokens)
        v = model.vocabulary_size

        rows = np.empty((v, v + 1))
        for a in range(1, v + 1):
            rows[a - 1] = model.log_distribution((a,))
        start_row = model.log_distribution((START,))

        chain = (START,) + self.tokens + (END,)
        gapset = {g + 1 for g in self.gaps}  # positions within the chain

        def edge_in(left):
            return start_row[1:] if left == START else rows[left - 1][1:]

        self.const = 0.0
        potentials = [np.zeros(v) for _ in self.gaps]
        adjacent = [False] * max(len(self.gaps) - 1, 0)
        gap_index = {pos: j for j, pos in enumerate(sorted(gapset))}

        for i in range(len(chain) - 1):
            left, right = chain[i], chain[i + 1]
            left_gap, right_gap = i in gapset, (i + 1) in gapset
            if not left_gap and not right_gap:
                self.const += float(
                    start_row[right] if left == START else rows[left - 1][right]
                )
            elif not left_gap and right_gap:
                potentials[gap_index[i + 1]] += edge_in(left)
            elif left_gap and not right_gap:
                potentials[gap_index[i]] += rows[:, right]
            else:
                adjacent[gap_index[i]] = True

        self.v = v
        self.rows = rows
        self.potentials = potentials
        self.adjacent = adjacent
        self.sign_transitions = rows[:, 1:]  # W[x-1, y-1] = log P(y | x)

    # -- max-product ---------------------------------------------------------

    def kbest(self, top_k: int) -> list[tuple[float, tuple[int, ...]]]:
        """k best fillings by lattice score, ties broken toward lower sign ids."""
        v = self.v
        p = len(self.gaps)
        k = min(top_k, v ** min(p, 8))

        scores = np.full((v, k), -np.inf)
        scores[:, 0] = self.potentials[0]
        backptr = []

        for j in range(p - 1):
            new_scores = np.full((v, k), -np.inf)
            pointers = np.zeros((v, k, 2), dtype=np.int64)
            if self.adjacent[j]:
                flat = (scores[:, :, None] + self.sign_transitions[:, None, :]).reshape(v * k, v)
                kth = min(k, v * k)
                for y in range(v):
                    column = flat[:, y]
                    part = np.argpartition(-column, kth - 1)[:kth]
                    order = part[np.lexsort((part, -column[part]))]
                    new_scores[y, : len(order)] = column[order]
                    pointers[y, : len(order), 0] = order // k
                    pointers[y, : len(order), 1] = order % k
            else:
                column = scores.reshape(-1)
                part = np.argpartition(-column, min(k, column.size) - 1)[: min(k, column.size)]
                order = part[np.lexsort((part, -column[part]))]
                new_scores[:, : len(order)] = column[order]
                pointers[:, : len(order), 0] = order // k
                pointers[:, : len(order), 1] = order % k
            new_scores += self.potentials[j + 1][:, None]
            scores = new_scores
            backptr.append(pointers)

        flat = scores.reshape(-1)
        finite = np.flatnonzero(np.isfinite(flat))
        kth = min(top_k, finite.size)
        part = finite[np.argpartition(-flat[finite], kth - 1)[:kth]] if kth else np.array([], int)
        order = part[np.lexsort((part, -flat[part]))]

        results = []
        for flat_idx in order:
            state, slot = int(flat_idx) // k, int(flat_idx) % k
            filling = [state + 1]
            for pointers in reversed(backptr):
                state, slot = (int(pointers[state, slot, 0]), int(pointers[state, slot, 1]))
                filling.append(state + 1)
            filling.reverse()
            results.append((self.const + float(flat[flat_idx]), tuple(filling)))
        return results

    # -- sum-product -----------------------------------------------------------

    def log_partition(self) -> float:
        forward = self._forward()
        return self.const + _log2sumexp(forward[-1])

    def _forward(self) -> list[np.ndarray]:
        forward = [self.potentials[0]]
        for j in range(len(self.gaps) - 1):
            prev = forward[-1]
            if self.adjacent[j]:
                summed = _log2sumexp(prev[:, None] + self.sign_transitions, axis=0)
            else:
                summed = np.full(self.v, _log2sumexp(prev))
            forward.append(summed + self.potentials[j + 1])
        return forward

    def marginals(self) -> list[np.ndarray]:
        """Exact per-gap posteriors (each a length V+1 array, slot 0 unused)."""
        p = len(self.gaps)
        forward = self._forward()
        backward = [np.zeros(self.v) for _ in range(p)]
        for j in range(p - 2, -1, -1):
            nxt = self.potentials[j + 1] + backward[j + 1]
            if self.adjacent[j]:
                backward[j] = _log2sumexp(self.sign_transitions + nxt[None, :], axis=1)
            else:
                backward[j] = np.full(self.v, _log2sumexp(nxt))
        out = []
        for j in range(p):
            log_post = forward[j] + backward[j]
            log_post -= _log2sumexp(log_post)
            post = np.zeros(self.v + 1)
            post[1:] = np.exp2(log_post)
            post[1:] /= post[1:].sum()
            out.append(post)
        return out


def restore_single_gap(model: NgramModel, tokens, top_k: int = 10) -> RestorationResult:
    """Score every vocabulary sign in the single gap by full-sequence probability."""
    gaps = _validate_gapped(model, tokens)
    if len(gaps) != 1:
        raise ValueError(f"expected exactly one gap, found {len(gaps)}")
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    if model.order < 2:
        raise ModelError("restoration needs a model of order >= 2")

    tokens = tuple(tokens)
    scores = np.empty(model.vocabulary_size)
    for sign in range(1, model.vocabulary_size + 1):
        scores[sign - 1] = model.sequence_log_prob(fill_gaps(tokens, (sign,)))
    log_z = _log2sumexp(scores)

    order = np.lexsort((np.arange(model.vocabulary_size), -scores))[:top_k]
    assignments = tuple(
        Assignment(
            filling=(int(i) + 1,),
            log_prob=float(scores[i]),
            probability=float(np.exp2(scores[i] - log_z)),
        )
        for i in order
    )
    return RestorationResult(assignments=assignments, method="enumeration", gap_positions=gaps)


def viterbi_restore(model: NgramModel, tokens, top_k: int = 10) -> RestorationResult:
    """Globally best fillings for any number of gaps via lattice max-product.

    Reported log probabilities come from rescoring each filled text with the
    canonical sequence scorer, so they match ``sequence_log_prob`` exactly;
    probabilities are posteriors over all possible fillings.
    """
    gaps = _validate_gapped(model, tokens)
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    lattice = _GapLattice(model, tokens)
    log_z = lattice.log_partition()

    assignments = []
    for _score, filling in lattice.kbest(top_k):
        log_prob = model.sequence_log_prob(fill_gaps(tokens, filling))
        assignments.append(
            Assignment(
                filling=filling,
                log_prob=log_prob,
                probability=float(np.exp2(log_prob - log_z)),
            )
        )
    assignments.sort(key=lambda a: (-a.log_prob, a.filling))
    return RestorationResult(
        assignments=tuple(assignments), method="viterbi", gap_positions=gaps
    )


def gap_marginals(model: NgramModel, tokens, committed=None) -> dict[int, np.ndarray]:
    """Exact posterior over signs for each unresolved gap, given commitments.

    ``committed`` maps gap positions (token indices) to sign ids.  Returns
    {position: probabilities} where probabilities is indexed by sign id
    (slot 0 unused); an empty dict when the text has no gaps or every gap
    is committed.
    """
    tokens = tuple(tokens)
    if not gap_positions(tokens):
        for token in tokens:
            if not 1 <= token <= model.vocabulary_size:
                raise ValueError(f"sign id {token} outside vocabulary")
        if committed:
            raise ValueError("commitments given for a text with no gaps")
        return {}
    gaps = _validate_gapped(model, tokens)
    committed = dict(committed or {})
    for position, sign in committed.items():
        if position not in gaps:
            raise ValueError(f"position {position} is not a gap")
        if not 1 <= sign <= model.vocabulary_size:
            raise ValueError(f"committed sign {sign} outside vocabulary")

    worked = list(tokens)
    for position, sign in committed.items():
        worked[position] = sign
    remaining = gap_positions(worked)
    if not remaining:
        return {}

    lattice = _GapLattice(model, worked)
    return dict(zip(remaining, lattice.marginals()))


def most_probable_text(model: NgramModel, length: int) -> tuple[tuple[int, ...], float]:
    """Argmax sign sequence of the given length, boundary terms included."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    result = viterbi_restore(model, (GAP,) * length, top_k=1)
    best = result.assignments[0]
    return best.filling, best.log_prob


def coverage_prefix(probabilities: np.ndarray, coverage: float) -> list[int]:
    """Smallest top-probability sign prefix whose cumulative mass >= coverage.

    Candidates are ordered by descending probability with ties broken by
    ascending sign id; coverage 1.0 returns every sign with positive mass.
    """
    if not 0.0 < coverage <= 1.0:
        raise ValueError(f"coverage must be in (0, 1], got {coverage}")
    probs = np.asarray(probabilities, dtype=float)
    signs = np.arange(1, probs.size)
    values = probs[1:]
    order = np.lexsort((signs, -values))
    if coverage >= 1.0:
        return [int(signs[i]) for i in order if values[i] > 0.0]
    out = []
    cumulative = 0.0
    for i in order:
        out.append(int(signs[i]))
        cumulative += float(values[i])
        if cumulative >= coverage - 1e-12:
            break
    return out
