"""Shared builders for test graphs.

Random graphs are grown the same way annotators grow them, by repeatedly
grouping currently unattached nodes under a new nonterminal.  Growing
through :func:`~treewerk.graph.build_increment` means every generated
graph satisfies the structural invariants by construction, and picking
non-adjacent nodes produces crossing branches, so discontinuity shows up
naturally in the sample.
"""

from __future__ import annotations

import random

import pytest

from treewerk import SyntaxGraph, Token, build_increment

CATEGORIES = ("NP", "PP", "S", "VP", "AP", "AVP")
FUNCTIONS = ("SB", "OA", "MO", "NK", "OC", "PD", "CP", "AC", "MNR")
POS_TAGS = ("ART", "NN", "VVFIN", "ADJA", "APPR", "ADV", "PPER", "KOUS")


def make_graph(sentence_id, words, nonterminals, parent, edge_label, comment=None):
    tokens = tuple(Token(i, form, pos) for i, (form, pos) in enumerate(words))
    return SyntaxGraph(
        sentence_id=sentence_id,
        tokens=tokens,
        nonterminals=dict(nonterminals),
        parent=dict(parent),
        edge_label=dict(edge_label),
        comment=comment,
    )


def baecker_graph() -> SyntaxGraph:
    """Fronted predicate: one node spans the first and the last two tokens."""
    return make_graph(
        "2",
        [
            ("Bäcker", "NN"),
            ("wollte", "VVFIN"),
            ("er", "PPER"),
            ("nie", "ADV"),
            ("werden", "VAINF"),
        ],
        {500: "VP", 501: "S"},
        {0: 500, 3: 500, 4: 500, 1: 501, 2: 501, 500: 501, 501: -1},
        {0: "PD", 3: "MO", 4: "HD", 1: "HD", 2: "SB", 500: "OC", 501: "--"},
    )


def extraposition_graph() -> SyntaxGraph:
    """Pronominal adverb up front, its clause extraposed to the right edge."""
    return make_graph(
        "1",
        [
            ("daran", "PROAV"),
            ("wird", "VAFIN"),
            ("ihn", "PPER"),
            ("Anna", "NN"),
            ("erkennen", "VVINF"),
            ("dass", "KOUS"),
            ("er", "PPER"),
            ("weint", "VVFIN"),
        ],
        {500: "S", 501: "PP", 502: "VP", 503: "S"},
        {
            5: 500,
            6: 500,
            7: 500,
            0: 501,
            500: 501,
            501: 502,
            2: 502,
            4: 502,
            1: 503,
            3: 503,
            502: 503,
            503: -1,
        },
        {
            5: "CP",
            6: "SB",
            7: "HD",
            0: "HD",
            500: "OC",
            501: "MO",
            2: "OA",
            4: "HD",
            1: "HD",
            3: "SB",
            502: "OC",
            503: "--",
        },
    )


def flat_graph(sentence_id: str, pairs) -> SyntaxGraph:
    tokens = tuple(Token(i, form, pos) for i, (form, pos) in enumerate(pairs))
    return SyntaxGraph(
        sentence_id=sentence_id,
        tokens=tokens,
        nonterminals={},
        parent={i: -1 for i in range(len(tokens))},
        edge_label={i: "--" for i in range(len(tokens))},
    )


def random_graph(
    rng: random.Random,
    max_tokens: int = 10,
    max_nonterminals: int = 5,
    sentence_id: str = "r",
    words=None,
) -> SyntaxGraph:
    if words is None:
        n_tokens = rng.randint(1, max_tokens)
        words = [(f"w{i}", rng.choice(POS_TAGS)) for i in range(n_tokens)]
    graph = flat_graph(sentence_id, words)
    for _ in range(rng.randint(0, max_nonterminals)):
        unattached = [n for n, p in graph.parent.items() if p == -1]
        if len(unattached) < 2:
            break
        size = rng.randint(2, min(4, len(unattached)))
        selected = rng.sample(unattached, size)
        labels = {node: rng.choice(FUNCTIONS) for node in selected}
        if rng.random() < 0.7:
            labels[rng.choice(selected)] = "HD"
        graph = build_increment(graph, selected, rng.choice(CATEGORIES), labels)
    return graph


@pytest.fixture
def baecker() -> SyntaxGraph:
    return baecker_graph()


@pytest.fixture
def extraposition() -> SyntaxGraph:
    return extraposition_graph()
