"""Comparison of two annotations of the same sentence.

Sentences annotated independently by two people are reconciled by lining
up constituents that cover the same tokens and reporting every point of
disagreement.  Nonterminals are aligned by the exact set of terminal
positions they dominate; a node whose yield set appears on both sides is
checked for category, function label, and attachment, while a yield set
present on one side only is a missing node on the other.

The same alignment yields the usual labeled precision, recall, and F1,
counting a node as matched when both the yield set and the category agree.
Precision of A against B equals recall of B against A by construction.

Both views assume the two annotations share the token sequence.  Diverging
forms or POS tags are reported as a single token-level inconsistency and
suppress all structural ones, since alignment by position is meaningless
across different strings; the metric functions refuse such pairs outright.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

from .graph import SyntaxGraph, VIRTUAL_ROOT


class InconsistencyKind(enum.Enum):
    """What disagrees, ordered roughly from most to least disruptive."""

    TOKEN_MISMATCH = "token-mismatch"
    NODE_MISSING = "node-missing"
    CATEGORY_MISMATCH = "category-mismatch"
    FUNCTION_MISMATCH = "function-mismatch"
    ATTACHMENT_MISMATCH = "attachment-mismatch"


_KIND_ORDER = {kind: index for index, kind in enumerate(InconsistencyKind)}


@dataclass(frozen=True)
class Inconsistency:
    """One disagreement, anchored at the tokens it concerns.

    ``left`` and ``right`` are node ids in the respective graphs; a missing
    node leaves the absent side as None.
    """

    kind: InconsistencyKind
    positions: tuple[int, ...]
    left: int | None
    right: int | None
    detail: str


@dataclass(frozen=True)
class AgreementMetrics:
    precision: float
    recall: float
    f1: float
    matched: int
    left_total: int
    right_total: int
    label_agreements: int
    label_comparisons: int


def _tokens_agree(a: SyntaxGraph, b: SyntaxGraph) -> bool:
    return [(t.form, t.pos) for t in a.tokens] == [(t.form, t.pos) for t in b.tokens]


def _yield_map(graph: SyntaxGraph) -> dict[frozenset[int], list[int]]:
    out: dict[frozenset[int], list[int]] = {}
    for node in graph.nonterminals:
        out.setdefault(frozenset(graph.yield_of(node)), []).append(node)
    # Same-yield chains (for instance a phrase wrapped in a single-branch
    # clause) pair up by depth so the outermost matches the outermost.
    for nodes in out.values():
        nodes.sort(key=lambda n: (len(list(graph.ancestors(n))), n))
    return out


def _parent_yield(graph: SyntaxGraph, node: int) -> frozenset[int] | None:
    parent = graph.parent[node]
    if parent == VIRTUAL_ROOT:
        return None
    return frozenset(graph.yield_of(parent))


def find_inconsistencies(a: SyntaxGraph, b: SyntaxGraph) -> list[Inconsistency]:
    """All disagreements between two annotations of one sentence.

    Results are ordered by leftmost affected token, then by kind, so a
    reviewer can walk the sentence once from left to right.
    """
    if not _tokens_agree(a, b):
        positions = tuple(
            i
            for i, (ta, tb) in enumerate(zip(a.tokens, b.tokens))
            if (ta.form, ta.pos) != (tb.form, tb.pos)
        ) or tuple(range(min(len(a.tokens), len(b.tokens)), max(len(a.tokens), len(b.tokens))))
        return [
            Inconsistency(
                kind=InconsistencyKind.TOKEN_MISMATCH,
                positions=positions,
                left=None,
                right=None,
                detail="token sequences differ; structural comparison skipped",
            )
        ]

    left_map = _yield_map(a)
    right_map = _yield_map(b)
    found: list[Inconsistency] = []

    for yield_set in left_map.keys() | right_map.keys():
        positions = tuple(sorted(yield_set))
        left_nodes = left_map.get(yield_set, [])
        right_nodes = right_map.get(yield_set, [])
        for la, rb in zip(left_nodes, right_nodes):
            if a.category(la) != b.category(rb):
                found.append(
                    Inconsistency(
                        kind=InconsistencyKind.CATEGORY_MISMATCH,
                        positions=positions,
                        left=la,
                        right=rb,
                        detail=f"{a.category(la)} vs {b.category(rb)}",
                    )
                )
            if a.edge_label[la] != b.edge_label[rb]:
                found.append(
                    Inconsistency(
                        kind=InconsistencyKind.FUNCTION_MISMATCH,
                        positions=positions,
                        left=la,
                        right=rb,
                        detail=f"{a.edge_label[la]} vs {b.edge_label[rb]}",
                    )
                )
            if _parent_yield(a, la) != _parent_yield(b, rb):
                found.append(
                    Inconsistency(
                        kind=InconsistencyKind.ATTACHMENT_MISMATCH,
                        positions=positions,
                        left=la,
                        right=rb,
                        detail="attached to different parents",
                    )
                )
        for la in left_nodes[len(right_nodes) :]:
            found.append(
                Inconsistency(
                    kind=InconsistencyKind.NODE_MISSING,
                    positions=positions,
                    left=la,
                    right=None,
                    detail=f"{a.category(la)} has no counterpart",
                )
            )
        for rb in right_nodes[len(left_nodes) :]:
            found.append(
                Inconsistency(
                    kind=InconsistencyKind.NODE_MISSING,
                    positions=positions,
                    left=None,
                    right=rb,
                    detail=f"{b.category(rb)} has no counterpart",
                )
            )

    found.sort(key=lambda inc: (inc.positions[0], _KIND_ORDER[inc.kind], inc.positions))
    return found


def agreement_metrics(a: SyntaxGraph, b: SyntaxGraph) -> AgreementMetrics:
    """Labeled agreement of annotation ``b`` measured against ``a``.

    A constituent counts as matched when the other side has a node with the
    same yield set and category; duplicates on one side match at most their
    multiplicity on the other.  Function labels are scored over matched
    pairs, skipping nodes the virtual root owns on both sides, whose label
    is fixed anyway.
    """
    if not _tokens_agree(a, b):
        raise ValueError("annotations tokenize the sentence differently")
    left = Counter(
        (frozenset(a.yield_of(n)), a.category(n)) for n in a.nonterminals
    )
    right = Counter(
        (frozenset(b.yield_of(n)), b.category(n)) for n in b.nonterminals
    )
    matched = sum((left & right).values())
    left_total = sum(left.values())
    right_total = sum(right.values())
    precision = matched / right_total if right_total else 0.0
    recall = matched / left_total if left_total else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0

    left_map = _yield_map(a)
    right_map = _yield_map(b)
    label_agreements = 0
    label_comparisons = 0
    for yield_set, left_nodes in left_map.items():
        for la, rb in zip(left_nodes, right_map.get(yield_set, [])):
            if a.category(la) != b.category(rb):
                continue
            if a.parent[la] == VIRTUAL_ROOT and b.parent[rb] == VIRTUAL_ROOT:
                continue
            label_comparisons += 1
            if a.edge_label[la] == b.edge_label[rb]:
                label_agreements += 1
    return AgreementMetrics(
        precision=precision,
        recall=recall,
        f1=f1,
        matched=matched,
        left_total=left_total,
        right_total=right_total,
        label_agreements=label_agreements,
        label_comparisons=label_comparisons,
    )
