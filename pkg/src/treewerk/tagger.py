"""Trigram POS tagging with reliability marking.

The tagger is the canonical instance of the shared Markov core: states are
POS tags, observations are word forms.  Known words emit through maximum
likelihood lexicon probabilities (an unseen word/tag pairing is genuinely
zero); unknown words back off to suffix statistics of up to
:data:`SUFFIX_LENGTH` characters with a capitalization flag, additively
smoothed and Bayes-inverted into emission scores.

Decoding is exact.  Beyond the best sequence the decoder can return the
globally second-best one, and the gap between the two is what drives the
annotation workflow: a decision is only presented as settled when the
runner-up is at least ``exp(threshold)`` times less probable, otherwise the
positions where the two analyses disagree are flagged for confirmation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .inventories import DEFAULT_TAGSET
from .markov import BOUNDARY, NEG_INF, TransitionModel, kbest_viterbi, train_transitions

#: Longest suffix consulted for unknown words.
SUFFIX_LENGTH = 5

#: Additive smoothing inside suffix tag distributions.
SUFFIX_ADDITIVE = 0.5

#: Default log-probability gap below which a decision is unreliable: the
#: runner-up analysis is within a factor of ten.
DEFAULT_RELIABILITY_THRESHOLD = math.log(10.0)


@dataclass(frozen=True)
class TrigramModel:
    """A trained tagger: transition model, lexicon, suffix statistics."""

    tagset: str
    transitions: TransitionModel[str]
    lexicon: dict[str, dict[str, int]]
    suffix_counts: dict[tuple[str, bool], dict[str, int]]

    @property
    def tags(self) -> tuple[str, ...]:
        return self.transitions.states


@dataclass(frozen=True)
class TagResult:
    """Best and second-best analyses of one sentence.

    ``second_tags`` is None when no second sequence of nonzero probability
    exists.  ``unreliable`` is empty until :func:`mark_reliability` runs.
    """

    tags: tuple[str, ...]
    log_probability: float
    second_tags: tuple[str, ...] | None
    second_log_probability: float | None
    unreliable: frozenset[int] = frozenset()


def train_trigram(
    corpus: Iterable[Sequence[tuple[str, str]]],
    tagset: str = DEFAULT_TAGSET,
) -> TrigramModel:
    """Train from sentences of (form, POS) pairs.

    Counts are exact corpus counts over sequences padded with two boundary
    markers; interpolation weights come from deleted interpolation (see
    :mod:`treewerk.markov`).  Every training token also feeds the suffix
    table: one count for each suffix of length 0 to :data:`SUFFIX_LENGTH`,
    keyed by the form's capitalization.
    """
    sentences = [list(sentence) for sentence in corpus]
    if not sentences:
        raise ValueError("empty training corpus")
    for sentence in sentences:
        if not sentence:
            raise ValueError("empty sentence in training corpus")
        for form, tag in sentence:
            if form == "" or tag == "":
                raise ValueError("empty form or tag in training corpus")

    transitions = train_transitions([[tag for _, tag in s] for s in sentences], order=2)
    lexicon: dict[str, dict[str, int]] = {}
    suffix_counts: dict[tuple[str, bool], dict[str, int]] = {}
    for sentence in sentences:
        for form, tag in sentence:
            row = lexicon.setdefault(form, {})
            row[tag] = row.get(tag, 0) + 1
            capitalized = form[:1].isupper()
            for length in range(min(SUFFIX_LENGTH, len(form)) + 1):
                key = (form[len(form) - length :], capitalized)
                srow = suffix_counts.setdefault(key, {})
                srow[tag] = srow.get(tag, 0) + 1
    return TrigramModel(
        tagset=tagset,
        transitions=transitions,
        lexicon=lexicon,
        suffix_counts=suffix_counts,
    )


def emission_log_probability(model: TrigramModel, form: str, tag: str) -> float:
    """log P(form | tag), up to a constant per unknown form.

    Known forms use lexicon relative frequencies.  Unknown forms use the
    longest recorded suffix with the form's capitalization flag (falling
    back to the flipped flag), additively smoothed over the tag alphabet,
    inverted by Bayes' rule; the constant P(form) is dropped, which shifts
    every sequence score for the sentence equally and so changes no
    comparison between analyses of the same sentence.
    """
    row = model.lexicon.get(form)
    uni = model.transitions.uni
    if row is not None:
        count = row.get(tag, 0)
        return math.log(count / uni[tag]) if count else NEG_INF
    srow = _suffix_row(model, form)
    tags = model.transitions.states
    total = sum(srow.values()) + SUFFIX_ADDITIVE * len(tags)
    p_tag_given_suffix = (srow.get(tag, 0) + SUFFIX_ADDITIVE) / total
    p_tag = uni[tag] / model.transitions.n_real
    return math.log(p_tag_given_suffix) - math.log(p_tag)


def _suffix_row(model: TrigramModel, form: str) -> dict[str, int]:
    capitalized = form[:1].isupper()
    for flag in (capitalized, not capitalized):
        for length in range(min(SUFFIX_LENGTH, len(form)), -1, -1):
            row = model.suffix_counts.get((form[len(form) - length :], flag))
            if row is not None:
                return row
    raise AssertionError("suffix table lost its length-0 rows")


def sequence_log_probability(
    model: TrigramModel, forms: Sequence[str], tags: Sequence[str]
) -> float:
    """Joint log probability of a complete analysis, boundary-padded."""
    if len(forms) != len(tags):
        raise ValueError("forms and tags differ in length")
    context: tuple = (BOUNDARY, BOUNDARY)
    total = 0.0
    for form, tag in zip(forms, tags):
        trans = model.transitions.log_probability(context, tag)
        emit = emission_log_probability(model, form, tag)
        if trans == NEG_INF or emit == NEG_INF:
            return NEG_INF
        total += trans + emit
        context = (context[1], tag)
    return total


def _decode(model: TrigramModel, forms: Sequence[str], k: int):
    tags = model.transitions.states
    index = {tag: i for i, tag in enumerate(tags)}
    emission_rows = []
    for form in forms:
        row = model.lexicon.get(form)
        if row is not None:
            allowed = sorted(index[tag] for tag in row)
            scores = {index[tag]: math.log(count / model.transitions.uni[tag]) for tag, count in row.items()}
        else:
            allowed = list(range(len(tags)))
            scores = {i: emission_log_probability(model, form, tags[i]) for i in allowed}
        emission_rows.append((allowed, scores))

    def step(state, sym_index, position):
        tag = tags[sym_index]
        weight = model.transitions.log_probability(state, tag)
        emit = emission_rows[position][1][sym_index]
        return (state[1], tag), weight + emit

    return kbest_viterbi(
        len(forms),
        tags,
        (BOUNDARY, BOUNDARY),
        step,
        k=k,
        allowed=lambda position: emission_rows[position][0],
    )


def viterbi(model: TrigramModel, forms: Sequence[str]) -> tuple[tuple[str, ...], float]:
    """The most probable tag sequence and its joint log probability.

    Exact score ties go to the sequence that is lexicographically smallest
    in tag vocabulary order.  An empty sentence decodes to the empty
    sequence with log probability zero.
    """
    (best,) = _decode(model, forms, k=1)[:1]
    return best[1], best[0]


def two_best(
    model: TrigramModel, forms: Sequence[str]
) -> tuple[tuple[tuple[str, ...], float], tuple[tuple[str, ...], float] | None]:
    """Globally best and second-best analyses.

    The second differs from the best in at least one position and is absent
    when no second sequence of nonzero probability exists.
    """
    results = _decode(model, forms, k=2)
    best = (results[0][1], results[0][0])
    if len(results) < 2 or results[1][0] == NEG_INF:
        return best, None
    return best, (results[1][1], results[1][0])


def mark_reliability(result: TagResult, threshold: float) -> TagResult:
    """Flag positions whose decision is within ``threshold`` of overturning.

    With no second analysis everything is reliable.  Otherwise, when the
    log-probability gap between best and second falls short of the
    threshold, exactly the positions where the two analyses disagree are
    flagged.  A zero threshold therefore marks everything reliable; raising
    the threshold can only grow the flagged set.
    """
    if threshold < 0:
        raise ValueError(f"reliability threshold must be >= 0, got {threshold}")
    if result.second_tags is None:
        return replace(result, unreliable=frozenset())
    gap = result.log_probability - result.second_log_probability
    if gap >= threshold:
        return replace(result, unreliable=frozenset())
    differing = frozenset(
        i for i, (a, b) in enumerate(zip(result.tags, result.second_tags)) if a != b
    )
    return replace(result, unreliable=differing)


def tag_pos(
    model: TrigramModel,
    forms: Sequence[str],
    threshold: float = DEFAULT_RELIABILITY_THRESHOLD,
) -> TagResult:
    """Tag one sentence and mark reliability in a single call."""
    best, second = two_best(model, forms)
    result = TagResult(
        tags=best[0],
        log_probability=best[1],
        second_tags=second[0] if second else None,
        second_log_probability=second[1] if second else None,
    )
    return mark_reliability(result, threshold)
