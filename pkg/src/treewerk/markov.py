"""Shared Markov-model machinery.

Three model families in this package (POS tagging over words, function
labeling over phrase children, relative structure tags over chunk spans) are
all the same thing underneath: an interpolated n-gram model over hidden
states emitting observed symbols, decoded exactly by dynamic programming.
This module holds that common core; the per-family modules contribute only
their state alphabets and emission models.

Probabilities live in the log domain with ``-inf`` as the zero sentinel.
Smoothed transition distributions are proper: for every context they sum to
one over the real state alphabet, which the tests check to 1e-9.

Sequences are padded on the left with ``order`` copies of :data:`BOUNDARY`
(two markers per sentence for the default trigram order).  There is no end
marker: sentence length is not modeled, which changes no argmax over
sequences of fixed length.

Interpolation weights come from deleted interpolation: every trigram
occurrence in training votes for whichever of the leave-one-out unigram,
bigram, and trigram relative frequencies is largest, ties going to the
lower order; the weights are the normalized vote masses, and a countless
corpus falls back to uniform weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Generic, Hashable, Iterable, Sequence, TypeVar

S = TypeVar("S", bound=Hashable)

NEG_INF = float("-inf")


class _Boundary:
    """Sentinel state padding the left context; never predicted or emitted."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "<boundary>"


BOUNDARY = _Boundary()


@dataclass(frozen=True)
class TransitionModel(Generic[S]):
    """Interpolated n-gram transitions over states (order 1 or 2).

    Count tables keep only windows ending in a real state, so boundary
    markers appear as context but are never predicted.  ``boundary_count``
    is the padded unigram mass of the marker (``order`` per sequence),
    needed by the deleted-interpolation denominators.
    """

    order: int
    states: tuple[S, ...]
    uni: dict[S, int]
    bi: dict[tuple, int]
    tri: dict[tuple, int]
    n_real: int
    n_sequences: int
    lambdas: tuple[float, ...]

    @property
    def boundary_count(self) -> int:
        return self.order * self.n_sequences

    def _bi_context_total(self, v) -> int:
        total = self._bi_totals.get(v)
        if total is None:
            total = sum(c for (ctx, _), c in self.bi.items() if ctx == v)
            self._bi_totals[v] = total
        return total

    def _tri_context_total(self, u, v) -> int:
        total = self._tri_totals.get((u, v))
        if total is None:
            total = sum(c for (a, b, _), c in self.tri.items() if (a, b) == (u, v))
            self._tri_totals[(u, v)] = total
        return total

    def __post_init__(self) -> None:
        object.__setattr__(self, "_bi_totals", {})
        object.__setattr__(self, "_tri_totals", {})

    def probability(self, context: tuple, state: S) -> float:
        """Smoothed P(state | context); context length equals the order.

        Each undefined higher-order relative frequency hands its weight down
        one order, so the distribution stays proper for every context.
        """
        f1 = self.uni[state] / self.n_real
        if self.order == 1:
            (v,) = context
            lam1, lam2 = self.lambdas
            bctx = self._bi_context_total(v)
            if bctx == 0:
                return f1
            return lam1 * f1 + lam2 * (self.bi.get((v, state), 0) / bctx)
        u, v = context
        lam1, lam2, lam3 = self.lambdas
        bctx = self._bi_context_total(v)
        if bctx == 0:
            return f1
        f2 = self.bi.get((v, state), 0) / bctx
        tctx = self._tri_context_total(u, v)
        if tctx == 0:
            return lam1 * f1 + (lam2 + lam3) * f2
        f3 = self.tri.get((u, v, state), 0) / tctx
        return lam1 * f1 + lam2 * f2 + lam3 * f3

    def log_probability(self, context: tuple, state: S) -> float:
        p = self.probability(context, state)
        return math.log(p) if p > 0.0 else NEG_INF


def train_transitions(
    sequences: Iterable[Sequence[S]],
    order: int = 2,
    state_key: Callable[[S], object] | None = None,
) -> TransitionModel[S]:
    """Count n-grams over boundary-padded sequences and fit interpolation
    weights.  ``state_key`` fixes the state ordering (and with it every
    tie-break downstream); by default states sort naturally.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    uni: dict[S, int] = {}
    bi: dict[tuple, int] = {}
    tri: dict[tuple, int] = {}
    n_real = 0
    n_sequences = 0
    for seq in sequences:
        if len(seq) == 0:
            raise ValueError("empty sequence in training data")
        n_sequences += 1
        padded: list = [BOUNDARY] * order + list(seq)
        for i in range(order, len(padded)):
            state = padded[i]
            n_real += 1
            uni[state] = uni.get(state, 0) + 1
            bigram = (padded[i - 1], state)
            bi[bigram] = bi.get(bigram, 0) + 1
            if order == 2:
                trigram = (padded[i - 2], padded[i - 1], state)
                tri[trigram] = tri.get(trigram, 0) + 1
    if n_sequences == 0:
        raise ValueError("no training sequences")

    states = tuple(sorted(uni, key=state_key) if state_key else sorted(uni))
    lambdas = deleted_interpolation(
        uni, bi, tri, n_real=n_real, boundary_count=order * n_sequences, order=order
    )
    return TransitionModel(
        order=order,
        states=states,
        uni=uni,
        bi=bi,
        tri=tri,
        n_real=n_real,
        n_sequences=n_sequences,
        lambdas=lambdas,
    )


def deleted_interpolation(
    uni: dict,
    bi: dict,
    tri: dict,
    n_real: int,
    boundary_count: int,
    order: int = 2,
) -> tuple[float, ...]:
    """Vote-based interpolation weights, one per model order.

    Every counted window of the highest order votes with its count for the
    order whose leave-one-out relative frequency is largest; exact ties go
    to the *lower* order, and the empty table falls back to the uniform
    vector.  Denominators follow the usual recipe: the count of the
    shortened context with one occurrence deleted, where the context count
    of a boundary marker is its padded mass.
    """

    def context_count(state) -> int:
        if isinstance(state, _Boundary):
            return boundary_count
        return uni.get(state, 0)

    def pair_count(u, v) -> int:
        if isinstance(v, _Boundary):
            # Only (B, B) has a boundary in second position: once per sequence.
            return boundary_count // order
        return bi.get((u, v), 0)

    if order == 1:
        votes = [0, 0]
        for (v, w), c in bi.items():
            f1 = (uni[w] - 1) / (n_real - 1) if n_real > 1 else 0.0
            cv = context_count(v)
            f2 = (c - 1) / (cv - 1) if cv > 1 else 0.0
            votes[1 if f2 > f1 else 0] += c
        total = sum(votes)
        if total == 0:
            return (0.5, 0.5)
        return (votes[0] / total, votes[1] / total)

    votes = [0, 0, 0]
    for (u, v, w), c in tri.items():
        f1 = (uni[w] - 1) / (n_real - 1) if n_real > 1 else 0.0
        cv = context_count(v)
        f2 = (bi[(v, w)] - 1) / (cv - 1) if cv > 1 else 0.0
        cuv = pair_count(u, v)
        f3 = (c - 1) / (cuv - 1) if cuv > 1 else 0.0
        best = max(f1, f2, f3)
        if f1 == best:
            votes[0] += c
        elif f2 == best:
            votes[1] += c
        else:
            votes[2] += c
    total = sum(votes)
    if total == 0:
        return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    return (votes[0] / total, votes[1] / total, votes[2] / total)


# -- exact k-best decoding -----------------------------------------------


class _Entry:
    """One partial hypothesis: a backpointer chain with a cached score."""

    __slots__ = ("logp", "parent", "symbol_index")

    def __init__(self, logp: float, parent: "_Entry | None", symbol_index: int):
        self.logp = logp
        self.parent = parent
        self.symbol_index = symbol_index

    def indices(self) -> tuple[int, ...]:
        out: list[int] = []
        entry: _Entry | None = self
        while entry is not None and entry.symbol_index >= 0:
            out.append(entry.symbol_index)
            entry = entry.parent
        out.reverse()
        return tuple(out)


def _take_best(candidates: list[_Entry], k: int) -> list[_Entry]:
    """Top-k by (score desc, symbol sequence asc).

    Scores are compared first and sequences materialized only inside groups
    of exactly equal score, so the common no-tie case stays cheap.
    """
    candidates.sort(key=lambda e: e.logp, reverse=True)
    if len(candidates) <= 1:
        return candidates[:k]
    out: list[_Entry] = []
    i = 0
    while i < len(candidates) and len(out) < k:
        j = i
        while j < len(candidates) and candidates[j].logp == candidates[i].logp:
            j += 1
        group = candidates[i:j]
        if len(group) > 1:
            group.sort(key=_Entry.indices)
        out.extend(group[: k - len(out)])
        i = j
    return out


def kbest_viterbi(
    n_positions: int,
    symbols: Sequence[S],
    start_state,
    step: Callable[[object, int, int], "tuple[object, float] | None"],
    k: int = 1,
    allowed: Callable[[int], Sequence[int]] | None = None,
) -> list[tuple[float, tuple[S, ...]]]:
    """Exact k-best sequence decoding over an arbitrary state machine.

    ``step(state, symbol_index, position)`` returns the successor state and
    log weight of emitting ``symbols[symbol_index]`` there, or None if the
    move is structurally inadmissible (as opposed to merely improbable,
    which is a ``-inf`` weight and stays in the hypothesis space).  Results
    come back best first; exact score ties are broken toward the sequence
    whose symbol index tuple is lexicographically smallest.  The list is
    shorter than ``k`` when fewer admissible sequences exist, and empty only
    when there is no admissible sequence at all.

    ``allowed`` optionally restricts the symbol indices tried per position;
    callers use it to prune symbols whose emission is structurally zero,
    which changes nothing about the result but much about the constant
    factor.
    """
    beam: dict[object, list[_Entry]] = {start_state: [_Entry(0.0, None, -1)]}
    all_indices = range(len(symbols))
    for position in range(n_positions):
        indices = all_indices if allowed is None else allowed(position)
        collected: dict[object, list[_Entry]] = {}
        for state, entries in beam.items():
            for sym_index in indices:
                advanced = step(state, sym_index, position)
                if advanced is None:
                    continue
                next_state, weight = advanced
                bucket = collected.setdefault(next_state, [])
                for entry in entries:
                    bucket.append(_Entry(entry.logp + weight, entry, sym_index))
        beam = {state: _take_best(cands, k) for state, cands in collected.items()}
        if not beam:
            return []
    final = _take_best([e for entries in beam.values() for e in entries], k)
    return [(e.logp, tuple(symbols[i] for i in e.indices())) for e in final]
