"""A small query language over annotated corpora.

Queries describe node configurations: each node term gives a predicate
over attributes, and adjacent node terms are linked by a structural
relation.  The language:

    query     = node (relation node)*
    node      = "#" name ":" "[" pred "]"     bind a named variable
              | "#" name                      reuse a bound variable
              | "[" pred "]"                  anonymous node
    pred      = or-expression over "&", "|", "!", parentheses
    atom      = attribute "=" quoted-string | "discont"
    attribute = "cat" | "func" | "pos" | "form"
    relation  = ">>"  proper dominance
              | ">"   immediate dominance
              | "."   linear precedence (all tokens before all tokens)
              | "$"   siblinghood (shared parent, distinct nodes)

``cat`` and ``discont`` hold only of nonterminals, ``pos`` and ``form``
only of terminals, and ``func`` of any node via its edge label.  Distinct
variables may match the same node; only ``$`` forces distinctness.

Matches are reported per sentence in corpus order; within a sentence,
assignments enumerate in a fixed order (variables left to right, candidate
nodes by leftmost covered token, then id), so results are reproducible.
Syntax errors carry the 1-based column at which parsing failed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .graph import SyntaxGraph


class QueryError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


_ATTRIBUTES = ("cat", "func", "pos", "form")
_RELATIONS = (">>", ">", ".", "$")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<rel>>>|>|\.|\$)
  | (?P<punct>[\[\]()!&|:#=])
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:\\.|[^"\\])*")
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    column: int  # 1-based


def _lex(text: str) -> list[_Token]:
    tokens = []
    index = 0
    while index < len(text):
        match = _TOKEN.match(text, index)
        if match is None:
            if text[index] == '"':
                raise QueryError("unterminated string", index + 1)
            raise QueryError(f"unexpected character {text[index]!r}", index + 1)
        if match.lastgroup != "ws":
            tokens.append(_Token(match.lastgroup, match.group(), index + 1))
        index = match.end()
    tokens.append(_Token("end", "", len(text) + 1))
    return tokens


# Predicates compile to closures over the graph; a node id plus the graph
# is everything an atom needs.
_Predicate = Callable[[SyntaxGraph, int], bool]


@dataclass(frozen=True)
class Query:
    variables: tuple[str, ...]
    predicates: tuple[_Predicate, ...]
    relations: tuple[tuple[int, int, str], ...]


@dataclass(frozen=True)
class Match:
    sentence_id: str
    bindings: dict[str, int]


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def take(self, kind: str | None = None, text: str | None = None) -> _Token:
        token = self.tokens[self.index]
        if kind is not None and token.kind != kind:
            raise QueryError(f"expected {kind}, found {token.text or 'end of query'!r}", token.column)
        if text is not None and token.text != text:
            raise QueryError(f"expected {text!r}, found {token.text or 'end of query'!r}", token.column)
        self.index += 1
        return token

    def parse(self) -> Query:
        variables: list[str] = []
        predicates: list[_Predicate] = []
        relations: list[tuple[int, int, str]] = []
        anonymous = 0

        def node_term() -> int:
            nonlocal anonymous
            token = self.peek()
            if token.kind == "punct" and token.text == "#":
                self.take()
                name = self.take("name").text
                if self.peek().kind == "punct" and self.peek().text == ":":
                    self.take()
                    if name in variables:
                        raise QueryError(f"variable #{name} bound twice", token.column)
                    predicate = self.bracketed()
                    variables.append(name)
                    predicates.append(predicate)
                    return len(variables) - 1
                if name not in variables:
                    raise QueryError(f"variable #{name} used before binding", token.column)
                return variables.index(name)
            if token.kind == "punct" and token.text == "[":
                predicate = self.bracketed()
                variables.append(f"${anonymous}")
                anonymous += 1
                predicates.append(predicate)
                return len(variables) - 1
            raise QueryError("expected a node term", token.column)

        left = node_term()
        while self.peek().kind == "rel":
            relation = self.take().text
            right = node_term()
            relations.append((left, right, relation))
            left = right
        end = self.peek()
        if end.kind != "end":
            raise QueryError(f"unexpected {end.text!r}", end.column)
        return Query(tuple(variables), tuple(predicates), tuple(relations))

    def bracketed(self) -> _Predicate:
        self.take("punct", "[")
        predicate = self.disjunction()
        self.take("punct", "]")
        return predicate

    def disjunction(self) -> _Predicate:
        parts = [self.conjunction()]
        while self.peek().kind == "punct" and self.peek().text == "|":
            self.take()
            parts.append(self.conjunction())
        if len(parts) == 1:
            return parts[0]
        return lambda graph, node: any(p(graph, node) for p in parts)

    def conjunction(self) -> _Predicate:
        parts = [self.negation()]
        while self.peek().kind == "punct" and self.peek().text == "&":
            self.take()
            parts.append(self.negation())
        if len(parts) == 1:
            return parts[0]
        return lambda graph, node: all(p(graph, node) for p in parts)

    def negation(self) -> _Predicate:
        token = self.peek()
        if token.kind == "punct" and token.text == "!":
            self.take()
            inner = self.negation()
            return lambda graph, node: not inner(graph, node)
        if token.kind == "punct" and token.text == "(":
            self.take()
            inner = self.disjunction()
            self.take("punct", ")")
            return inner
        return self.atom()

    def atom(self) -> _Predicate:
        token = self.peek()
        if token.kind != "name":
            raise QueryError("expected predicate", token.column)
        if token.text == "discont":
            self.take()
            return lambda graph, node: (
                not graph.is_terminal(node) and graph.is_discontinuous(node)
            )
        if token.text not in _ATTRIBUTES:
            raise QueryError(f"unknown attribute {token.text!r}", token.column)
        attribute = self.take().text
        equals = self.peek()
        if not (equals.kind == "punct" and equals.text == "="):
            # "=" is lexed as part of no token class; report where it should be.
            raise QueryError(f"expected '=' after {attribute}", equals.column)
        self.take()
        literal = self.take("string")
        value = re.sub(r"\\(.)", r"\1", literal.text[1:-1])
        if attribute == "cat":
            return lambda graph, node: (
                not graph.is_terminal(node) and graph.category(node) == value
            )
        if attribute == "func":
            return lambda graph, node: graph.edge_label.get(node) == value
        if attribute == "pos":
            return lambda graph, node: (
                graph.is_terminal(node) and graph.tokens[node].pos == value
            )
        return lambda graph, node: (
            graph.is_terminal(node) and graph.tokens[node].form == value
        )


def parse_query(text: str) -> Query:
    if not text.strip():
        raise QueryError("empty query", 1)
    return _Parser(text).parse()


def _holds(graph: SyntaxGraph, x: int, y: int, relation: str) -> bool:
    if relation == ">":
        return graph.parent.get(y) == x and not graph.is_terminal(x)
    if relation == ">>":
        if graph.is_terminal(x):
            return False
        return x in graph.ancestors(y)
    if relation == ".":
        return max(graph.yield_of(x)) < min(graph.yield_of(y))
    return x != y and graph.parent.get(x) == graph.parent.get(y)


def match_sentence(graph: SyntaxGraph, query: Query) -> Iterator[dict[str, int]]:
    """All assignments of graph nodes to query variables, in a fixed order."""
    all_nodes = sorted(
        graph.nodes(), key=lambda n: (min(graph.yield_of(n)), n)
    )
    candidates = []
    for predicate in query.predicates:
        candidates.append([n for n in all_nodes if predicate(graph, n)])

    checks: dict[int, list[tuple[int, int, str]]] = {}
    for x, y, relation in query.relations:
        checks.setdefault(max(x, y), []).append((x, y, relation))

    assignment: list[int] = []

    def extend(index: int) -> Iterator[dict[str, int]]:
        if index == len(candidates):
            yield dict(zip(query.variables, assignment))
            return
        for node in candidates[index]:
            ok = all(
                _holds(graph, assignment[x] if x < index else node,
                       assignment[y] if y < index else node, relation)
                for x, y, relation in checks.get(index, [])
            )
            if not ok:
                continue
            assignment.append(node)
            yield from extend(index + 1)
            assignment.pop()

    return extend(0)


def search(graphs: Iterable[SyntaxGraph], query: str | Query) -> list[Match]:
    """Run a query over a corpus and collect every match."""
    if isinstance(query, str):
        query = parse_query(query)
    matches = []
    for graph in graphs:
        for bindings in match_sentence(graph, query):
            matches.append(Match(graph.sentence_id, bindings))
    return matches
