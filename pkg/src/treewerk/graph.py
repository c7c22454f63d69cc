"""Syntax graphs with crossing branches.

The central data structure is :class:`SyntaxGraph`: a rooted, labeled graph
over a fixed token sequence in which every node has exactly one parent and
any node may dominate a discontinuous stretch of the sentence.  Dropping the
usual non-tangling condition means a constituent like an infinitive phrase
can directly contain a fronted complement, so argument structure is read off
the tree without threading trace indices through the annotation.

Conventions, shared with the export format:

* terminals are numbered ``0 .. n-1`` in surface order and are identified
  with their position;
* nonterminal ids start at :data:`MIN_NONTERMINAL_ID` so the two id spaces
  cannot collide on realistic sentence lengths;
* the virtual root is not a node.  In memory it is the sentinel
  :data:`VIRTUAL_ROOT`; the serializer writes it as parent id ``0``.  Keeping
  the sentinel distinct from ``0`` means terminal 0 and the root can never be
  confused by arithmetic on ids.

Graphs are immutable values: every editing operation builds a new graph and
leaves its input untouched, which is what makes optimistic concurrency in the
annotation service and undo in clients cheap and safe.  The mappings held by
a graph must therefore never be mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .inventories import (
    Inventory,
    ROOT_LABEL,
    default_categories,
    default_functions,
    default_tagset,
)

#: In-memory parent of unattached nodes.  Serialized as id 0.
VIRTUAL_ROOT = -1

#: First legal nonterminal id.
MIN_NONTERMINAL_ID = 500

#: Hard caps; graphs beyond these sizes are refused by validation.
MAX_TOKENS = 5000
MAX_NODE_ID = 10000

#: Reserved POS tag carried by trace pseudo-terminals.  Always accepted by
#: strict validation, never a member of a tagset inventory.
TRACE_TAG = "*T*"


class GraphError(ValueError):
    """Raised when an operation is asked to build or use an ill-formed graph."""


@dataclass(frozen=True)
class Token:
    """One terminal: surface form plus POS tag.

    ``pos_reliable`` is the automation hand-shake: taggers clear it on
    decisions an annotator still has to confirm, editors set it back once
    confirmed.
    """

    position: int
    form: str
    pos: str
    pos_reliable: bool = True


@dataclass(frozen=True)
class Violation:
    """One well-formedness failure found by :func:`validate`."""

    node: int | None
    rule: str
    message: str


@dataclass(frozen=True)
class SyntaxGraph:
    """A sentence with its (possibly crossing) constituent structure.

    ``nonterminals`` maps node id to category; ``parent`` and ``edge_label``
    have one entry per node, terminals included.  Children of the virtual
    root carry :data:`~treewerk.inventories.ROOT_LABEL`.
    """

    sentence_id: str
    tokens: tuple[Token, ...]
    nonterminals: Mapping[int, str]
    parent: Mapping[int, int]
    edge_label: Mapping[int, str]
    comment: str | None = None
    _children: Mapping[int, tuple[int, ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "_children", _child_index(self))

    # -- node bookkeeping -------------------------------------------------

    def is_terminal(self, node: int) -> bool:
        return 0 <= node < len(self.tokens)

    def has_node(self, node: int) -> bool:
        return self.is_terminal(node) or node in self.nonterminals

    def nodes(self) -> Iterator[int]:
        """All node ids: terminals in order, then nonterminals by id."""
        yield from range(len(self.tokens))
        yield from sorted(self.nonterminals)

    def category(self, node: int) -> str:
        try:
            return self.nonterminals[node]
        except KeyError:
            raise GraphError(f"{self.sentence_id}: no nonterminal {node}") from None

    def _require(self, node: int) -> None:
        if not self.has_node(node):
            raise GraphError(f"{self.sentence_id}: unknown node {node}")

    # -- structure queries ------------------------------------------------

    def children(self, node: int) -> tuple[int, ...]:
        """Children of ``node`` (or of :data:`VIRTUAL_ROOT`), ordered by the
        leftmost terminal position of their yields."""
        if node != VIRTUAL_ROOT:
            self._require(node)
        return self._children.get(node, ())

    def ancestors(self, node: int) -> Iterator[int]:
        """Proper ancestors from parent upward, excluding the virtual root.

        Stops early on a parent cycle instead of looping forever, so it is
        safe to call while diagnosing an invalid graph.
        """
        self._require(node)
        seen = {node}
        cur = self.parent.get(node, VIRTUAL_ROOT)
        while cur != VIRTUAL_ROOT and cur not in seen:
            yield cur
            seen.add(cur)
            cur = self.parent.get(cur, VIRTUAL_ROOT)

    def yield_of(self, node: int) -> tuple[int, ...]:
        """Terminal positions dominated by ``node``, in ascending order.

        A terminal's yield is itself.  Computed by descent over the child
        index with a visited set, so a cyclic (invalid) graph yields partial
        results rather than hanging.
        """
        self._require(node)
        if self.is_terminal(node):
            return (node,)
        out: list[int] = []
        seen: set[int] = set()
        stack = [node]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            if self.is_terminal(cur):
                out.append(cur)
            else:
                stack.extend(self._children.get(cur, ()))
        out.sort()
        return tuple(out)

    def blocks(self, node: int) -> tuple[tuple[int, int], ...]:
        """Maximal contiguous intervals of the yield, as (first, last) pairs."""
        positions = self.yield_of(node)
        if not positions:
            return ()
        out: list[tuple[int, int]] = []
        start = prev = positions[0]
        for pos in positions[1:]:
            if pos == prev + 1:
                prev = pos
                continue
            out.append((start, prev))
            start = prev = pos
        out.append((start, prev))
        return tuple(out)

    def is_discontinuous(self, node: int) -> bool:
        """True iff the node's yield falls into two or more blocks."""
        return len(self.blocks(node)) > 1

    def head_child(self, node: int) -> int | None:
        """The unique HD child of a nonterminal, or None.

        More than one HD child is a validation error; here the leftmost wins
        so the query stays total on graphs under repair.
        """
        if node != VIRTUAL_ROOT:
            self.category(node)
        for child in self.children(node):
            if self.edge_label.get(child) == "HD":
                return child
        return None

    def descendants(self, node: int) -> Iterator[int]:
        """All proper descendants, preorder, cycle-safe."""
        self._require(node)
        seen = {node}
        stack = list(reversed(self._children.get(node, ())))
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            yield cur
            if not self.is_terminal(cur):
                stack.extend(reversed(self._children.get(cur, ())))


def _child_index(graph: SyntaxGraph) -> dict[int, tuple[int, ...]]:
    by_parent: dict[int, list[int]] = {}
    for node, par in graph.parent.items():
        by_parent.setdefault(par, []).append(node)

    # Leftmost terminal per node, found bottom-up without recursion so the
    # index also gets built for graphs that are about to fail validation.
    leftmost: dict[int, float] = {}

    def first_terminal(node: int) -> float:
        if 0 <= node < len(graph.tokens):
            return node
        if node in leftmost:
            return leftmost[node]
        best = float("inf")
        stack = [node]
        seen: set[int] = set()
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            if 0 <= cur < len(graph.tokens):
                best = min(best, cur)
            else:
                stack.extend(by_parent.get(cur, ()))
        leftmost[node] = best
        return best

    return {
        par: tuple(sorted(kids, key=lambda n: (first_terminal(n), n)))
        for par, kids in by_parent.items()
    }


def validate(
    graph: SyntaxGraph,
    strict: bool = False,
    tagset: Inventory | None = None,
    categories: Inventory | None = None,
    functions: Inventory | None = None,
) -> list[Violation]:
    """Check well-formedness; return all violations rather than the first.

    Lenient mode checks structure only: position numbering, id ranges and
    caps, single-parenthood with an acyclic path to the virtual root, no
    childless nonterminals, at most one HD child apiece, and complete parent
    and edge label maps.  Strict mode additionally requires every POS tag,
    category, and function label to be a member of its inventory (the
    bundled defaults unless inventories are passed in).  Lenient is the
    editing gate, strict the release gate.
    """
    out: list[Violation] = []
    n = len(graph.tokens)

    if n == 0:
        out.append(Violation(None, "empty-sentence", "sentence has no tokens"))
    if n > MAX_TOKENS:
        out.append(Violation(None, "token-cap", f"{n} tokens exceed cap {MAX_TOKENS}"))
    for i, token in enumerate(graph.tokens):
        if token.position != i:
            out.append(
                Violation(i, "token-position", f"token at index {i} has position {token.position}")
            )
        if token.form == "":
            out.append(Violation(i, "empty-form", f"token {i} has an empty form"))

    for node in sorted(graph.nonterminals):
        if not MIN_NONTERMINAL_ID <= node <= MAX_NODE_ID:
            out.append(
                Violation(
                    node,
                    "node-id-range",
                    f"nonterminal id {node} outside [{MIN_NONTERMINAL_ID}, {MAX_NODE_ID}]",
                )
            )
        elif node < n:
            # Sentences longer than MIN_NONTERMINAL_ID exist in principle;
            # their nonterminal ids must clear the terminal id space.
            out.append(
                Violation(node, "id-collision", f"nonterminal id {node} is also a terminal position")
            )
        if graph.nonterminals[node] == "":
            out.append(Violation(node, "empty-category", f"node {node} has an empty category"))

    nodes = set(range(n)) | set(graph.nonterminals)
    for node in sorted(nodes):
        if node not in graph.parent:
            out.append(Violation(node, "missing-parent", f"node {node} has no parent entry"))
        if node not in graph.edge_label:
            out.append(Violation(node, "missing-label", f"node {node} has no edge label"))
    for node in sorted(graph.parent):
        if node not in nodes:
            out.append(Violation(node, "stray-parent", f"parent entry for unknown node {node}"))
            continue
        par = graph.parent[node]
        if par == VIRTUAL_ROOT:
            continue
        if par not in graph.nonterminals:
            kind = "terminal-parent" if 0 <= par < n else "unknown-parent"
            out.append(Violation(node, kind, f"node {node} attached to non-nonterminal {par}"))
    for node in sorted(graph.edge_label):
        if node not in nodes:
            out.append(Violation(node, "stray-label", f"edge label for unknown node {node}"))

    # A node is rooted if its parent chain reaches the virtual root without
    # revisiting anything; revisiting means a cycle (or a tail into one).
    for node in sorted(nodes):
        seen = {node}
        cur = graph.parent.get(node)
        while cur is not None and cur != VIRTUAL_ROOT:
            if cur in seen or cur not in nodes:
                if cur in seen:
                    out.append(Violation(node, "cycle", f"parent chain of {node} revisits {cur}"))
                break
            seen.add(cur)
            cur = graph.parent.get(cur)

    for node in sorted(graph.nonterminals):
        kids = graph.children(node) if graph.has_node(node) else ()
        if not kids:
            out.append(Violation(node, "childless", f"nonterminal {node} has no children"))
        heads = [k for k in kids if graph.edge_label.get(k) == "HD"]
        if len(heads) > 1:
            out.append(
                Violation(node, "multiple-heads", f"nonterminal {node} has {len(heads)} HD children")
            )

    if strict:
        tagset = tagset or default_tagset()
        categories = categories or default_categories()
        functions = functions or default_functions()
        for token in graph.tokens:
            if token.pos not in tagset and token.pos != TRACE_TAG:
                out.append(
                    Violation(
                        token.position,
                        "unknown-pos",
                        f"POS {token.pos!r} not in tagset {tagset.name!r}",
                    )
                )
        for node in sorted(graph.nonterminals):
            if graph.nonterminals[node] not in categories:
                out.append(
                    Violation(node, "unknown-category", f"category {graph.nonterminals[node]!r} not in inventory")
                )
        for node in sorted(graph.edge_label):
            label = graph.edge_label[node]
            if label not in functions:
                out.append(Violation(node, "unknown-function", f"function {label!r} not in inventory"))

    return out


def next_node_id(graph: SyntaxGraph) -> int:
    """Id the next built nonterminal will get."""
    base = max(MIN_NONTERMINAL_ID, len(graph.tokens))
    if graph.nonterminals:
        return max(base, max(graph.nonterminals) + 1)
    return base


def build_increment(
    graph: SyntaxGraph,
    selected: Iterable[int],
    category: str,
    labels: Mapping[int, str],
) -> SyntaxGraph:
    """Group currently unattached nodes under a fresh nonterminal.

    This is the single structure-building step of the annotation workflow:
    all tree construction, interactive or scripted, goes through it, which is
    what keeps the single-parent and head-uniqueness invariants inductive.
    The selection must be non-empty, may mix terminals and nonterminals, and
    every selected node must currently hang off the virtual root.  ``labels``
    assigns each selected node its edge function; at most one may be HD.
    """
    chosen = list(selected)
    if not chosen:
        raise GraphError("empty selection")
    if len(set(chosen)) != len(chosen):
        raise GraphError("selection repeats a node")
    for node in chosen:
        if not graph.has_node(node):
            raise GraphError(f"unknown node {node}")
        if graph.parent.get(node) != VIRTUAL_ROOT:
            raise GraphError(f"node {node} is already attached")
    if set(labels) != set(chosen):
        raise GraphError("labels must cover exactly the selected nodes")
    if not category:
        raise GraphError("empty category")
    heads = [node for node, label in labels.items() if label == "HD"]
    if len(heads) > 1:
        raise GraphError(f"{len(heads)} HD labels in one increment")

    new_id = next_node_id(graph)
    if new_id > MAX_NODE_ID:
        raise GraphError(f"node id {new_id} exceeds cap {MAX_NODE_ID}")

    nonterminals = dict(graph.nonterminals)
    nonterminals[new_id] = category
    parent = dict(graph.parent)
    edge_label = dict(graph.edge_label)
    for node in chosen:
        parent[node] = new_id
        edge_label[node] = labels[node]
    parent[new_id] = VIRTUAL_ROOT
    edge_label[new_id] = ROOT_LABEL
    return SyntaxGraph(
        sentence_id=graph.sentence_id,
        tokens=graph.tokens,
        nonterminals=nonterminals,
        parent=parent,
        edge_label=edge_label,
        comment=graph.comment,
    )
