"""Alignment of dual annotations: inconsistency reports and agreement."""

import math
import random

import pytest

from treewerk.compare import (
    InconsistencyKind,
    agreement_metrics,
    find_inconsistencies,
)

from conftest import POS_TAGS, make_graph, random_graph

WORDS = [("der", "ART"), ("Mann", "NN"), ("schläft", "VVFIN")]


def annotated(nonterminals, parent, edge_label, words=WORDS):
    return make_graph("1", words, nonterminals, parent, edge_label)


def two_level():
    return annotated(
        {500: "NP", 501: "S"},
        {0: 500, 1: 500, 2: 501, 500: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 500: "SB", 501: "--"},
    )


# -- inconsistency kinds ---------------------------------------------------


def test_identical_annotations_have_no_inconsistencies():
    assert find_inconsistencies(two_level(), two_level()) == []


def test_category_mismatch():
    left = two_level()
    right = annotated(
        {500: "PP", 501: "S"},
        {0: 500, 1: 500, 2: 501, 500: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 500: "SB", 501: "--"},
    )
    found = find_inconsistencies(left, right)
    assert [i.kind for i in found] == [InconsistencyKind.CATEGORY_MISMATCH]
    assert found[0].positions == (0, 1)
    assert found[0].left == 500 and found[0].right == 500
    assert found[0].detail == "NP vs PP"


def test_function_mismatch():
    left = two_level()
    right = annotated(
        {500: "NP", 501: "S"},
        {0: 500, 1: 500, 2: 501, 500: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 500: "OA", 501: "--"},
    )
    found = find_inconsistencies(left, right)
    assert [i.kind for i in found] == [InconsistencyKind.FUNCTION_MISMATCH]
    assert found[0].detail == "SB vs OA"


def test_node_missing():
    left = two_level()
    right = annotated(
        {501: "S"},
        {0: 501, 1: 501, 2: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 501: "--"},
    )
    found = find_inconsistencies(left, right)
    assert [i.kind for i in found] == [InconsistencyKind.NODE_MISSING]
    assert found[0].left == 500 and found[0].right is None
    assert "NP" in found[0].detail
    # and symmetrically the other way around
    flipped = find_inconsistencies(right, left)
    assert [i.kind for i in flipped] == [InconsistencyKind.NODE_MISSING]
    assert flipped[0].left is None and flipped[0].right == 500


def test_attachment_mismatch():
    words = [("a", "NN"), ("b", "NN"), ("c", "NN")]
    left = annotated(
        {500: "NP", 501: "VP", 502: "S"},
        {0: 500, 1: 501, 2: 502, 500: 501, 501: 502, 502: -1},
        {0: "HD", 1: "HD", 2: "HD", 500: "SB", 501: "OC", 502: "--"},
        words,
    )
    # the NP over token 0 hangs off the clause instead of the verb phrase
    right = annotated(
        {500: "NP", 501: "VP", 502: "S"},
        {0: 500, 1: 501, 2: 502, 500: 502, 501: 502, 502: -1},
        {0: "HD", 1: "HD", 2: "HD", 500: "SB", 501: "OC", 502: "--"},
        words,
    )
    found = find_inconsistencies(left, right)
    kinds = [i.kind for i in found]
    assert InconsistencyKind.ATTACHMENT_MISMATCH in kinds
    att = next(i for i in found if i.kind is InconsistencyKind.ATTACHMENT_MISMATCH)
    assert att.positions == (0,)
    # the VP also differs: it lost the NP on the right side
    assert InconsistencyKind.NODE_MISSING in kinds or len(found) >= 1


def test_token_mismatch_suppresses_structure():
    left = two_level()
    right = annotated(
        {501: "S"},
        {0: 501, 1: 501, 2: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 501: "--"},
        [("der", "ART"), ("Hund", "NN"), ("schläft", "VVFIN")],
    )
    found = find_inconsistencies(left, right)
    assert [i.kind for i in found] == [InconsistencyKind.TOKEN_MISMATCH]
    assert found[0].positions == (1,)


def test_token_count_mismatch_points_at_the_tail():
    left = two_level()
    right = annotated(
        {501: "S"},
        {0: 501, 1: 501, 2: 501, 3: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 3: "MO", 501: "--"},
        WORDS + [("tief", "ADV")],
    )
    found = find_inconsistencies(left, right)
    assert [i.kind for i in found] == [InconsistencyKind.TOKEN_MISMATCH]
    assert found[0].positions == (3,)


def test_same_yield_chains_pair_by_depth():
    words = [("a", "NN"), ("b", "NN")]
    chain = annotated(
        {500: "NP", 501: "S"},
        {0: 500, 1: 500, 500: 501, 501: -1},
        {0: "NK", 1: "HD", 500: "SB", 501: "--"},
        words,
    )
    flipped = annotated(
        {500: "S", 501: "NP"},
        {0: 501, 1: 501, 501: 500, 500: -1},
        {0: "NK", 1: "HD", 501: "SB", 500: "--"},
        words,
    )
    # outermost S pairs with outermost S, inner NP with inner NP
    assert find_inconsistencies(chain, flipped) == []


def test_report_is_sorted_by_position_then_kind():
    rng = random.Random(40)
    for _ in range(30):
        words = [(f"w{i}", rng.choice(POS_TAGS)) for i in range(rng.randint(2, 8))]
        a = random_graph(rng, sentence_id="1", words=words)
        b = random_graph(rng, sentence_id="1", words=words)
        found = find_inconsistencies(a, b)
        keys = [(i.positions[0], i.kind.value, i.positions) for i in found]
        ordered = sorted(
            found,
            key=lambda i: (
                i.positions[0],
                list(InconsistencyKind).index(i.kind),
                i.positions,
            ),
        )
        assert found == ordered


# -- metrics ---------------------------------------------------------------


def test_perfect_agreement_metrics():
    m = agreement_metrics(two_level(), two_level())
    assert m.precision == m.recall == m.f1 == 1.0
    assert m.matched == m.left_total == m.right_total == 2
    # the clause is a root child on both sides, only the NP's label counts
    assert m.label_comparisons == 1
    assert m.label_agreements == 1


def test_metrics_reject_token_mismatch():
    left = two_level()
    right = annotated(
        {501: "S"},
        {0: 501, 1: 501, 2: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 501: "--"},
        [("die", "ART"), ("Frau", "NN"), ("schläft", "VVFIN")],
    )
    with pytest.raises(ValueError, match="tokenize"):
        agreement_metrics(left, right)


def test_half_agreement_by_hand():
    left = two_level()
    right = annotated(
        {500: "PP", 501: "S"},
        {0: 500, 1: 500, 2: 501, 500: 501, 501: -1},
        {0: "NK", 1: "HD", 2: "HD", 500: "SB", 501: "--"},
    )
    m = agreement_metrics(left, right)
    # of two nodes per side only the clause matches (yield and category)
    assert m.matched == 1
    assert m.precision == 0.5 and m.recall == 0.5 and m.f1 == 0.5
    # the mismatched category pair is excluded from label scoring, and the
    # matched clause pair is excluded as a root child on both sides
    assert m.label_comparisons == 0


def test_precision_equals_transposed_recall():
    rng = random.Random(41)
    for _ in range(40):
        words = [(f"w{i}", rng.choice(POS_TAGS)) for i in range(rng.randint(1, 8))]
        a = random_graph(rng, sentence_id="1", words=words)
        b = random_graph(rng, sentence_id="1", words=words)
        ab = agreement_metrics(a, b)
        ba = agreement_metrics(b, a)
        assert ab.precision == ba.recall
        assert ab.recall == ba.precision
        assert math.isclose(ab.f1, ba.f1, abs_tol=1e-12)
        assert ab.matched == ba.matched
        assert ab.matched <= min(ab.left_total, ab.right_total)
        if ab.precision + ab.recall:
            assert math.isclose(
                ab.f1,
                2 * ab.precision * ab.recall / (ab.precision + ab.recall),
                abs_tol=1e-12,
            )
        assert ab.label_agreements <= ab.label_comparisons


def test_empty_structures_yield_zero_metrics():
    words = [("a", "NN")]
    flat_a = annotated({}, {0: -1}, {0: "--"}, words)
    flat_b = annotated({}, {0: -1}, {0: "--"}, words)
    m = agreement_metrics(flat_a, flat_b)
    assert m.precision == m.recall == m.f1 == 0.0
    assert m.matched == m.left_total == m.right_total == 0


def test_no_inconsistency_implies_perfect_f1():
    rng = random.Random(42)
    for _ in range(40):
        words = [(f"w{i}", rng.choice(POS_TAGS)) for i in range(rng.randint(1, 8))]
        a = random_graph(rng, sentence_id="1", words=words)
        b = random_graph(rng, sentence_id="1", words=words)
        if find_inconsistencies(a, b):
            continue
        m = agreement_metrics(a, b)
        if m.left_total:
            assert m.f1 == 1.0
            assert m.label_agreements == m.label_comparisons
