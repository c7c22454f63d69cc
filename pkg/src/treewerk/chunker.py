"""Internal structure of chunks via relative depth tags.

A continuous phrase over a token span can be written as a tag sequence with
one tag per token transition: ``delta`` says how much deeper or shallower
the current token attaches compared to the previous one, and a positive
delta names the categories of the newly opened nodes, outermost first.  The
phrase

.. code-block:: none

    NP(ART der, NN Mann, PP(APPR auf, ART der, NN Bank))

encodes as ``0, +1(PP), 0, 0``: *Mann* attaches beside *der*, *auf* opens a
PP one level down, *der* and *Bank* stay beside it.  Decoding replays the
tags against a stack of open nodes, so predicting phrase-internal structure
reduces to sequence tagging over POS emissions, one submodel per outer
category.

The encoding is a bijection on fragments where it is defined, and
:func:`encode_relative` refuses anything outside that class rather than
producing tags that would decode to a different tree.  Outside the class
are: discontinuous fragments; unary chains (a node whose single child is a
nonterminal), whose extra node depth deltas cannot see; fragments whose
first token sits below the fragment root, since no tag describes token
zero; and transitions that close one node and open another between adjacent
tokens, which a single signed delta cannot distinguish from staying put.
Depth deltas beyond +/-3 are refused as out of range.

Decoded fragments carry ``--`` edge labels throughout: structure comes from
this module, functions from the labeler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import MIN_NONTERMINAL_ID, SyntaxGraph, Token, VIRTUAL_ROOT, validate
from .inventories import ROOT_LABEL
from .markov import BOUNDARY, NEG_INF, TransitionModel, kbest_viterbi, train_transitions
from .tagger import DEFAULT_RELIABILITY_THRESHOLD

#: Largest representable attachment depth change between adjacent tokens.
MAX_DELTA = 3

#: Outer categories structured by default: the chunk types worth the effort.
DEFAULT_CHUNK_CATEGORIES = ("NP", "PP", "AP")

EMISSION_ADDITIVE = 0.1


class ChunkError(ValueError):
    """A fragment outside the encodable class, or an undecodable tag."""


@dataclass(frozen=True, order=True)
class RelTag:
    """One token transition: depth change plus newly opened categories."""

    delta: int
    opened: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if abs(self.delta) > MAX_DELTA:
            raise ChunkError(f"delta {self.delta} out of range [-{MAX_DELTA}, {MAX_DELTA}]")
        if len(self.opened) != max(self.delta, 0):
            raise ChunkError(
                f"tag with delta {self.delta} must open {max(self.delta, 0)} nodes, "
                f"got {len(self.opened)}"
            )

    def __repr__(self) -> str:
        if self.delta > 0:
            return f"RelTag(+{self.delta}, {'/'.join(self.opened)})"
        return f"RelTag({self.delta})"


def encode_relative(graph: SyntaxGraph, root: int) -> list[RelTag]:
    """Encode the subtree under ``root`` as one tag per token transition.

    Raises :class:`ChunkError` on fragments outside the encodable class
    (see the module docstring); never returns tags that fail to decode back
    to the input structure.
    """
    category = graph.category(root)  # also checks root is a nonterminal
    span = graph.yield_of(root)
    if graph.is_discontinuous(root):
        raise ChunkError(f"node {root} ({category}) is discontinuous")

    fragment_nodes = {root}
    for node in graph.descendants(root):
        if not graph.is_terminal(node):
            fragment_nodes.add(node)
            if graph.is_discontinuous(node):
                raise ChunkError(f"node {node} under {root} is discontinuous")
    for node in fragment_nodes:
        children = graph.children(node)
        if len(children) == 1 and not graph.is_terminal(children[0]):
            raise ChunkError(f"unary chain at node {node}")

    # Path from the root down to each token's parent; depth = len(path) - 1.
    def path_of(position: int) -> list[int]:
        chain = [graph.parent[position]]
        while chain[-1] != root:
            chain.append(graph.parent[chain[-1]])
        chain.reverse()
        return chain

    paths = [path_of(position) for position in span]
    if len(paths[0]) != 1:
        raise ChunkError("first token is not attached to the fragment root")

    tags: list[RelTag] = []
    for i in range(1, len(span)):
        prev, cur = paths[i - 1], paths[i]
        delta = len(cur) - len(prev)
        if abs(delta) > MAX_DELTA:
            raise ChunkError(f"depth delta {delta} out of range at token {span[i]}")
        if delta > 0:
            # Opening: the current path must extend the previous one.
            if cur[len(prev) - 1] != prev[-1]:
                raise ChunkError(f"close and open between tokens {span[i - 1]} and {span[i]}")
            opened = tuple(graph.nonterminals[node] for node in cur[len(prev) :])
            tags.append(RelTag(delta, opened))
        else:
            # Closing or staying: the current parent must be on the previous path.
            if cur[-1] != prev[len(cur) - 1]:
                raise ChunkError(f"close and open between tokens {span[i - 1]} and {span[i]}")
            tags.append(RelTag(delta))
    return tags


def decode_relative(
    tokens: Sequence[tuple[str, str]],
    category: str,
    tags: Sequence[RelTag],
    sentence_id: str = "chunk",
) -> SyntaxGraph:
    """Replay tags against a stack of open nodes, rebuilding the fragment.

    ``tokens`` are (form, POS) pairs for the whole span; exactly
    ``len(tokens) - 1`` tags are consumed, none for a single token.  Every
    edge gets the unassigned label.
    """
    if not tokens:
        raise ChunkError("empty token span")
    if len(tags) != len(tokens) - 1:
        raise ChunkError(f"{len(tokens)} tokens need {len(tokens) - 1} tags, got {len(tags)}")

    root = MIN_NONTERMINAL_ID
    nonterminals = {root: category}
    parent = {root: VIRTUAL_ROOT}
    edge_label = {root: ROOT_LABEL}
    stack = [root]
    next_id = root + 1

    graph_tokens = tuple(
        Token(position=i, form=form, pos=pos) for i, (form, pos) in enumerate(tokens)
    )
    parent[0] = stack[-1]
    edge_label[0] = ROOT_LABEL
    for i, tag in enumerate(tags, start=1):
        if tag.delta > 0:
            for opened_category in tag.opened:
                nonterminals[next_id] = opened_category
                parent[next_id] = stack[-1]
                edge_label[next_id] = ROOT_LABEL
                stack.append(next_id)
                next_id += 1
        elif tag.delta < 0:
            if len(stack) + tag.delta < 1:
                raise ChunkError(f"tag {i} closes below the fragment root")
            del stack[tag.delta :]
        parent[i] = stack[-1]
        edge_label[i] = ROOT_LABEL
    return SyntaxGraph(
        sentence_id=sentence_id,
        tokens=graph_tokens,
        nonterminals=nonterminals,
        parent=parent,
        edge_label=edge_label,
    )


@dataclass(frozen=True)
class ChunkSubmodel:
    """Tag transitions and POS emissions for one outer category."""

    category: str
    transitions: TransitionModel[RelTag]
    emissions: dict[RelTag, dict[str, int]]
    events: int

    @property
    def tags(self) -> tuple[RelTag, ...]:
        return self.transitions.states


@dataclass(frozen=True)
class ChunkModel:
    submodels: dict[str, ChunkSubmodel]
    pos_alphabet: tuple[str, ...]
    order: int
    skipped: int


def iter_chunk_phrases(
    graph: SyntaxGraph, categories: Sequence[str]
) -> Iterable[int]:
    """Maximal target-category nodes: those without a target-category
    ancestor.  Nested chunks are covered by their outermost phrase."""
    targets = set(categories)
    for node in sorted(graph.nonterminals):
        if graph.nonterminals[node] not in targets:
            continue
        if any(graph.nonterminals.get(a) in targets for a in graph.ancestors(node)):
            continue
        yield node


def train_chunk(
    treebank: Iterable[SyntaxGraph],
    categories: Sequence[str] = DEFAULT_CHUNK_CATEGORIES,
    order: int = 2,
) -> ChunkModel:
    """Train per-category structure models over every encodable maximal
    chunk phrase.

    Phrases outside the encodable class are counted in ``skipped``, not
    silently dropped.  Single-token phrases are trivially encodable but
    carry no transitions, so they contribute nothing.
    """
    events: dict[str, list[tuple[list[RelTag], list[str]]]] = {}
    alphabet: set[str] = set()
    skipped = 0
    for graph in treebank:
        violations = validate(graph)
        if violations:
            first = violations[0]
            raise ValueError(
                f"sentence {graph.sentence_id!r} is ill-formed: {first.rule}: {first.message}"
            )
        for node in iter_chunk_phrases(graph, categories):
            try:
                tags = encode_relative(graph, node)
            except ChunkError:
                skipped += 1
                continue
            span = graph.yield_of(node)
            pos_seq = [graph.tokens[p].pos for p in span]
            alphabet.update(pos_seq)
            if tags:
                events.setdefault(graph.nonterminals[node], []).append((tags, pos_seq))

    if not events:
        raise ValueError(f"no trainable phrases (skipped {skipped})")
    submodels: dict[str, ChunkSubmodel] = {}
    for category in sorted(events):
        phrase_events = events[category]
        transitions = train_transitions([tags for tags, _ in phrase_events], order=order)
        emissions: dict[RelTag, dict[str, int]] = {}
        for tags, pos_seq in phrase_events:
            for i, tag in enumerate(tags, start=1):
                row = emissions.setdefault(tag, {})
                row[pos_seq[i]] = row.get(pos_seq[i], 0) + 1
        submodels[category] = ChunkSubmodel(
            category=category,
            transitions=transitions,
            emissions=emissions,
            events=len(phrase_events),
        )
    return ChunkModel(
        submodels=submodels,
        pos_alphabet=tuple(sorted(alphabet)),
        order=order,
        skipped=skipped,
    )


def emission_log_probability(
    model: ChunkModel, submodel: ChunkSubmodel, tag: RelTag, pos: str
) -> float:
    row = submodel.emissions.get(tag, {})
    total = submodel.transitions.uni[tag] + EMISSION_ADDITIVE * (len(model.pos_alphabet) + 1)
    return math.log((row.get(pos, 0) + EMISSION_ADDITIVE) / total)


def structure_chunk(
    model: ChunkModel,
    span: Sequence[tuple[str, str]],
    category: str,
    threshold: float = DEFAULT_RELIABILITY_THRESHOLD,
) -> tuple[SyntaxGraph, bool]:
    """Predict internal structure for a token span under an outer category.

    Returns the decoded fragment and a reliability flag computed from the
    gap to the second-best well-formed tag sequence.  The decoder's state
    carries the running depth, and moves that would close below the root
    are pruned outright, so the chosen sequence always decodes.
    """
    submodel = model.submodels.get(category)
    if submodel is None:
        raise ValueError(f"no chunk model for category {category!r}")
    if not span:
        raise ChunkError("empty token span")
    if len(span) == 1:
        return decode_relative(span, category, []), True

    symbols = submodel.tags
    order = model.order

    def step(state, sym_index, position):
        context, depth = state
        tag = symbols[sym_index]
        new_depth = depth + tag.delta
        if new_depth < 0:
            return None
        weight = submodel.transitions.log_probability(context, tag)
        emit = emission_log_probability(model, submodel, tag, span[position + 1][1])
        return ((context + (tag,))[-order:], new_depth), weight + emit

    results = kbest_viterbi(
        len(span) - 1, symbols, ((BOUNDARY,) * order, 0), step, k=2
    )
    if not results:
        raise ValueError(f"no admissible structure for a span of {len(span)} tokens")
    best_logp, best_tags = results[0]
    reliable = True
    if len(results) > 1 and results[1][0] > NEG_INF:
        reliable = best_logp - results[1][0] >= threshold
    return decode_relative(span, category, best_tags), reliable
