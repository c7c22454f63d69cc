"""Grammatical function labeling over phrase children.

For every phrase category a separate Markov model runs over the function
labels of the phrase's children, ordered by leftmost terminal position, and
emits each child's tag: the POS tag for a terminal child, the category for
a phrase child.  Labeling a prospective phrase is then exact decoding; when
the category itself is unknown, each candidate category's model scores the
children and the best posterior (sequence probability times a configurable
category prior) wins.

The reliability story mirrors the tagger: the category decision and each
label position carry a flag saying whether the runner-up analysis came
close enough that an annotator should look.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import SyntaxGraph, validate
from .markov import BOUNDARY, NEG_INF, TransitionModel, kbest_viterbi, train_transitions
from .tagger import DEFAULT_RELIABILITY_THRESHOLD

#: Additive smoothing inside emission distributions.
EMISSION_ADDITIVE = 0.1

#: One labeled child of a training phrase: (child tag, function label).
Event = tuple[str, tuple[tuple[str, str], ...]]


@dataclass(frozen=True)
class PhraseModel:
    """Label transitions and child-tag emissions for one category."""

    category: str
    transitions: TransitionModel[str]
    emissions: dict[str, dict[str, int]]
    events: int

    @property
    def labels(self) -> tuple[str, ...]:
        return self.transitions.states


@dataclass(frozen=True)
class LabelerModel:
    """Per-category phrase models sharing one child-tag alphabet."""

    models: dict[str, PhraseModel]
    child_alphabet: tuple[str, ...]
    order: int
    use_priors: bool
    total_events: int

    def categories(self) -> tuple[str, ...]:
        return tuple(sorted(self.models))

    def prior(self, category: str) -> float:
        return self.models[category].events / self.total_events


@dataclass(frozen=True)
class LabelingResult:
    category: str
    category_reliable: bool
    labels: tuple[str, ...]
    label_reliable: tuple[bool, ...]
    log_probability: float


def extract_events(treebank: Iterable[SyntaxGraph]) -> list[Event]:
    """One event per nonterminal: its category and labeled child sequence.

    Children appear in leftmost-yield order, the same order decoding sees.
    Graphs must pass lenient validation; the virtual root contributes no
    event.
    """
    events: list[Event] = []
    for graph in treebank:
        violations = validate(graph)
        if violations:
            first = violations[0]
            raise ValueError(
                f"sentence {graph.sentence_id!r} is ill-formed: {first.rule}: {first.message}"
            )
        for node in sorted(graph.nonterminals):
            children = graph.children(node)
            pairs = tuple(
                (
                    graph.tokens[child].pos if graph.is_terminal(child) else graph.nonterminals[child],
                    graph.edge_label[child],
                )
                for child in children
            )
            events.append((graph.nonterminals[node], pairs))
    return events


def train_labeler(
    treebank: Iterable[SyntaxGraph],
    order: int = 2,
    use_priors: bool = True,
) -> LabelerModel:
    """Train per-category models from a validated treebank."""
    return train_labeler_events(extract_events(treebank), order=order, use_priors=use_priors)


def train_labeler_events(
    events: Sequence[Event], order: int = 2, use_priors: bool = True
) -> LabelerModel:
    """Train from pre-extracted events (the treebank-free entry point)."""
    if not events:
        raise ValueError("no training events")
    by_category: dict[str, list[tuple[tuple[str, str], ...]]] = {}
    alphabet: set[str] = set()
    for category, pairs in events:
        if not pairs:
            raise ValueError(f"event for category {category!r} has no children")
        by_category.setdefault(category, []).append(pairs)
        alphabet.update(tag for tag, _ in pairs)

    models: dict[str, PhraseModel] = {}
    for category in sorted(by_category):
        phrases = by_category[category]
        transitions = train_transitions(
            [[label for _, label in pairs] for pairs in phrases], order=order
        )
        emissions: dict[str, dict[str, int]] = {}
        for pairs in phrases:
            for tag, label in pairs:
                row = emissions.setdefault(label, {})
                row[tag] = row.get(tag, 0) + 1
        models[category] = PhraseModel(
            category=category,
            transitions=transitions,
            emissions=emissions,
            events=len(phrases),
        )
    return LabelerModel(
        models=models,
        child_alphabet=tuple(sorted(alphabet)),
        order=order,
        use_priors=use_priors,
        total_events=len(events),
    )


def emission_log_probability(
    model: LabelerModel, phrase: PhraseModel, label: str, tag: str
) -> float:
    """log P(child tag | label), additively smoothed.

    The alphabet is global across categories and carries one extra slot
    standing in for all tags never observed in training, so every tag gets
    positive mass and the distribution over alphabet-plus-unseen is proper.
    """
    row = phrase.emissions.get(label, {})
    total = phrase.transitions.uni[label] + EMISSION_ADDITIVE * (len(model.child_alphabet) + 1)
    return math.log((row.get(tag, 0) + EMISSION_ADDITIVE) / total)


def _decode(model: LabelerModel, phrase: PhraseModel, child_tags: Sequence[str], k: int):
    labels = phrase.labels
    order = model.order

    def step(state, sym_index, position):
        label = labels[sym_index]
        weight = phrase.transitions.log_probability(state, label)
        emit = emission_log_probability(model, phrase, label, child_tags[position])
        return (state + (label,))[-order:], weight + emit

    return kbest_viterbi(len(child_tags), labels, (BOUNDARY,) * order, step, k=k)


def score_children(
    model: LabelerModel, category: str, child_tags: Sequence[str]
) -> tuple[tuple[str, ...], float]:
    """Best label sequence and its log probability under one category."""
    phrase = model.models.get(category)
    if phrase is None:
        raise ValueError(f"no model for category {category!r}")
    if not child_tags:
        raise ValueError("no children to label")
    (best,) = _decode(model, phrase, child_tags, k=1)[:1]
    return best[1], best[0]


def label_phrase(
    model: LabelerModel,
    child_tags: Sequence[str],
    known_category: str | None = None,
    threshold: float = DEFAULT_RELIABILITY_THRESHOLD,
) -> LabelingResult:
    """Choose a category (unless given) and label the children.

    Category choice maximizes best-sequence log probability plus log prior
    (priors configurable off at training time); exact ties go to the
    alphabetically first category.  ``log_probability`` is the winning
    sequence's own score, prior excluded, so with ``known_category`` the
    result agrees with :func:`score_children` exactly.
    """
    if threshold < 0:
        raise ValueError(f"reliability threshold must be >= 0, got {threshold}")
    if not child_tags:
        raise ValueError("no children to label")

    if known_category is not None:
        phrase = model.models.get(known_category)
        if phrase is None:
            raise ValueError(f"no model for category {known_category!r}")
        winner, winner_results = known_category, _decode(model, phrase, child_tags, k=2)
        category_reliable = True
    else:
        scored: list[tuple[str, float, list]] = []
        for category in model.categories():
            phrase = model.models[category]
            results = _decode(model, phrase, child_tags, k=2)
            score = results[0][0]
            if model.use_priors:
                score += math.log(model.prior(category))
            scored.append((category, score, results))
        winner, winner_score, winner_results = max(scored, key=lambda item: item[1])
        # max() keeps the first maximum, and categories are sorted.
        runner_up = max(
            (score for category, score, _ in scored if category != winner),
            default=NEG_INF,
        )
        category_reliable = winner_score - runner_up >= threshold if len(scored) > 1 else True

    best = winner_results[0]
    labels = best[1]
    reliable = [True] * len(labels)
    if len(winner_results) > 1 and winner_results[1][0] > NEG_INF:
        second = winner_results[1]
        if best[0] - second[0] < threshold:
            reliable = [a == b for a, b in zip(labels, second[1])]
    return LabelingResult(
        category=winner,
        category_reliable=category_reliable,
        labels=labels,
        label_reliable=tuple(reliable),
        log_probability=best[0],
    )
