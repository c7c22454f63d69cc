"""Projection of crossing structures onto continuous trees.

Annotation here treats word order and grammatical relations separately: the
stored graphs attach every constituent where it belongs functionally, even
when that crosses other branches.  Interchange with tools that expect
context-free trees needs the other view, a continuous tree in which
displaced material is replaced by co-indexed trace terminals.  This module
computes that view and its inverse.

The transformation processes discontinuous nodes bottom-up (smallest
subtree height first, ids breaking ties).  For the node at hand, the yield
block containing its HD child stays put; without a head, the block with the
most terminals stays, the leftmost on a tie.  Every other block is detached
as a unit: the single child spanning it, or a fresh wrapper node of the
host's category over its children.  The detached block is re-attached as a
child of the lowest ancestor that is continuous at that moment, falling
back to the virtual root, which is the lowest place the new edge can be
drawn without crossing: attachment never changes an ancestor's yield, so a
continuous target stays continuous, and every rejected node in between was
already discontinuous and sheds a block it could not reach anyway.  In the
host, a trace terminal takes the block's place directly beside the kept
material (left blocks in order just before it, right blocks just after),
so the host ends up contiguous.

Trace terminals carry the form ``*T<n>*`` and the reserved POS tag
:data:`~treewerk.graph.TRACE_TAG`; the accompanying :class:`TraceTable` is
a bijection between trace ids and moved nodes, with enough bookkeeping for
:func:`undo_projection` to rebuild a graph with the original yield sets.

A continuous graph is its own projection: the transformation returns it
unchanged with an empty table.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import (
    GraphError,
    MAX_NODE_ID,
    SyntaxGraph,
    Token,
    TRACE_TAG,
    VIRTUAL_ROOT,
    next_node_id,
    validate,
)
from .inventories import ROOT_LABEL


@dataclass(frozen=True)
class TraceEntry:
    """One displaced block: where its trace sits and what moved away.

    ``label`` is the function the block bore under its host; a wrapper
    created for a multi-child block has no single function, so its trace
    carries the unassigned label while the wrapper's children keep theirs.
    """

    trace_id: int
    trace_terminal: int
    moved_node: int
    host: int
    label: str
    synthetic: bool


@dataclass(frozen=True)
class TraceTable:
    entries: tuple[TraceEntry, ...]

    def by_trace_id(self, trace_id: int) -> TraceEntry:
        for entry in self.entries:
            if entry.trace_id == trace_id:
                return entry
        raise KeyError(trace_id)

    def by_moved_node(self, node: int) -> TraceEntry:
        for entry in self.entries:
            if entry.moved_node == node:
                return entry
        raise KeyError(node)


def trace_form(trace_id: int) -> str:
    return f"*T{trace_id}*"


class _Workspace:
    """Mutable scratch copy of a graph during projection.

    Leaves keep stable ids (original positions for tokens, ids above
    MAX_NODE_ID for traces); surface order lives in ``order`` and positions
    are derived from it, so inserting a trace never renumbers anything
    until the final freeze.
    """

    def __init__(self, graph: SyntaxGraph):
        self.sentence_id = graph.sentence_id
        self.comment = graph.comment
        self.order: list[int] = list(range(len(graph.tokens)))
        self.tokens: dict[int, Token] = {t.position: t for t in graph.tokens}
        self.traces: dict[int, int] = {}  # leaf id -> trace id
        self.nonterminals = dict(graph.nonterminals)
        self.parent = dict(graph.parent)
        self.edge = dict(graph.edge_label)
        self.next_nonterminal = next_node_id(graph)
        self.next_leaf = MAX_NODE_ID + 1

    # Structure is small and changes every round; recomputing beats caching.

    def children(self, node: int) -> list[int]:
        return [n for n, p in self.parent.items() if p == node]

    def position(self) -> dict[int, int]:
        return {leaf: i for i, leaf in enumerate(self.order)}

    def leaves_under(self, node: int, pos: dict[int, int]) -> list[int]:
        if node in self.tokens or node in self.traces:
            return [node]
        out: list[int] = []
        stack = [node]
        while stack:
            cur = stack.pop()
            for child in self.children(cur):
                if child in self.nonterminals:
                    stack.append(child)
                else:
                    out.append(child)
        out.sort(key=pos.__getitem__)
        return out

    def blocks_of(self, node: int, pos: dict[int, int]) -> list[list[int]]:
        leaves = self.leaves_under(node, pos)
        blocks: list[list[int]] = []
        for leaf in leaves:
            if blocks and pos[leaf] == pos[blocks[-1][-1]] + 1:
                blocks[-1].append(leaf)
            else:
                blocks.append([leaf])
        return blocks

    def heights(self) -> dict[int, int]:
        memo: dict[int, int] = {}

        def height(node: int) -> int:
            if node not in self.nonterminals:
                return 0
            if node not in memo:
                memo[node] = 1 + max((height(c) for c in self.children(node)), default=0)
            return memo[node]

        for node in self.nonterminals:
            height(node)
        return memo


def to_phenogrammatical(graph: SyntaxGraph) -> tuple[SyntaxGraph, TraceTable]:
    """Project a graph onto a continuous tree plus a trace table.

    The token sequence of the result is the input sequence with trace
    terminals spliced in; forms, POS tags, and relative order of the real
    tokens are untouched.  The result has no discontinuous node.
    """
    violations = validate(graph)
    if violations:
        first = violations[0]
        raise GraphError(
            f"sentence {graph.sentence_id!r} is ill-formed: {first.rule}: {first.message}"
        )
    if not any(graph.is_discontinuous(node) for node in graph.nonterminals):
        return graph, TraceTable(())

    ws = _Workspace(graph)
    entries: list[TraceEntry] = []
    next_trace_id = 1

    while True:
        pos = ws.position()
        heights = ws.heights()
        split = [
            node for node in ws.nonterminals if len(ws.blocks_of(node, pos)) > 1
        ]
        if not split:
            break
        host = min(split, key=lambda n: (heights[n], n))
        blocks = ws.blocks_of(host, pos)

        head = None
        for child in ws.children(host):
            if ws.edge.get(child) == "HD":
                head = child
                break
        if head is not None:
            head_leaf = ws.leaves_under(head, pos)[0]
            kept = next(i for i, b in enumerate(blocks) if head_leaf in b)
        else:
            kept = max(range(len(blocks)), key=lambda i: (len(blocks[i]), -i))

        kept_first = blocks[kept][0]
        right_anchor = blocks[kept][-1]
        for index, block in enumerate(blocks):
            if index == kept:
                continue
            block_set = set(block)
            movers = [
                c for c in ws.children(host) if ws.leaves_under(c, pos)[0] in block_set
            ]
            if len(movers) == 1:
                moved = movers[0]
                label = ws.edge[moved]
                synthetic = False
            else:
                moved = ws.next_nonterminal
                ws.next_nonterminal += 1
                ws.nonterminals[moved] = ws.nonterminals[host]
                # park the wrapper under the host so the departing block
                # still counts in ancestor yields while the walk below runs;
                # a target judged continuous with the block keeps its yield
                # unchanged on attachment, so it cannot split again later
                ws.parent[moved] = host
                for child in movers:
                    ws.parent[child] = moved
                label = ROOT_LABEL
                synthetic = True

            target = ws.parent[host]
            while target != VIRTUAL_ROOT and len(ws.blocks_of(target, pos)) > 1:
                target = ws.parent[target]
            ws.parent[moved] = target
            if synthetic:
                inherited = ws.edge[host]
                # an inherited HD would sit beside the host under the same
                # parent; one head per node, so the wrapper goes unassigned
                if target == VIRTUAL_ROOT or inherited == "HD":
                    inherited = ROOT_LABEL
                ws.edge[moved] = inherited
            elif target == VIRTUAL_ROOT:
                ws.edge[moved] = ROOT_LABEL

            trace_leaf = ws.next_leaf
            ws.next_leaf += 1
            ws.traces[trace_leaf] = next_trace_id
            ws.parent[trace_leaf] = host
            ws.edge[trace_leaf] = label
            # Blocks left of the kept one stack up directly before its first
            # leaf in block order; right blocks chain after its last leaf.
            if index < kept:
                at = ws.order.index(kept_first)
            else:
                at = ws.order.index(right_anchor) + 1
                right_anchor = trace_leaf
            ws.order.insert(at, trace_leaf)
            pos = ws.position()

            entries.append(
                TraceEntry(
                    trace_id=next_trace_id,
                    trace_terminal=trace_leaf,  # leaf id; renumbered below
                    moved_node=moved,
                    host=host,
                    label=label,
                    synthetic=synthetic,
                )
            )
            next_trace_id += 1

    return _freeze(ws, entries)


def _freeze(ws: _Workspace, entries: list[TraceEntry]) -> tuple[SyntaxGraph, TraceTable]:
    renumber = {leaf: i for i, leaf in enumerate(ws.order)}
    if ws.nonterminals and min(ws.nonterminals) < len(ws.order):
        raise GraphError("trace insertion overflows into the nonterminal id space")
    tokens = []
    for leaf in ws.order:
        if leaf in ws.tokens:
            original = ws.tokens[leaf]
            tokens.append(
                Token(
                    position=renumber[leaf],
                    form=original.form,
                    pos=original.pos,
                    pos_reliable=original.pos_reliable,
                )
            )
        else:
            tokens.append(
                Token(position=renumber[leaf], form=trace_form(ws.traces[leaf]), pos=TRACE_TAG)
            )
    parent = {}
    edge = {}
    for node, par in ws.parent.items():
        key = renumber.get(node, node)
        parent[key] = par
        edge[key] = ws.edge[node]
    projected = SyntaxGraph(
        sentence_id=ws.sentence_id,
        tokens=tuple(tokens),
        nonterminals=ws.nonterminals,
        parent=parent,
        edge_label=edge,
        comment=ws.comment,
    )
    table = TraceTable(
        tuple(
            TraceEntry(
                trace_id=e.trace_id,
                trace_terminal=renumber[e.trace_terminal],
                moved_node=renumber.get(e.moved_node, e.moved_node),
                host=e.host,
                label=e.label,
                synthetic=e.synthetic,
            )
            for e in entries
        )
    )
    return projected, table


def undo_projection(projected: SyntaxGraph, table: TraceTable) -> SyntaxGraph:
    """Re-attach moved blocks at their traces and drop the traces.

    Inverts :func:`to_phenogrammatical` exactly: wrappers dissolve into
    their children, single-child blocks take back their recorded function
    label, and the surviving tokens are renumbered to close the gaps.
    """
    nonterminals = dict(projected.nonterminals)
    parent = dict(projected.parent)
    edge = dict(projected.edge_label)
    drop: set[int] = set()

    for entry in reversed(table.entries):
        drop.add(entry.trace_terminal)
        if entry.synthetic:
            for child in projected.children(entry.moved_node):
                parent[child] = entry.host
            del nonterminals[entry.moved_node]
            del parent[entry.moved_node]
            del edge[entry.moved_node]
        else:
            parent[entry.moved_node] = entry.host
            edge[entry.moved_node] = entry.label
        del parent[entry.trace_terminal]
        del edge[entry.trace_terminal]

    keep = [t for t in projected.tokens if t.position not in drop]
    renumber = {t.position: i for i, t in enumerate(keep)}
    tokens = tuple(
        Token(position=renumber[t.position], form=t.form, pos=t.pos, pos_reliable=t.pos_reliable)
        for t in keep
    )
    return SyntaxGraph(
        sentence_id=projected.sentence_id,
        tokens=tokens,
        nonterminals=nonterminals,
        parent={renumber.get(n, n): p for n, p in parent.items()},
        edge_label={renumber.get(n, n): label for n, label in edge.items()},
        comment=projected.comment,
    )
