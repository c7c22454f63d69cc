"""Line-oriented exchange format for syntax graphs.

The format is deliberately plain: UTF-8 text, LF line ends, tab-separated
fields, one node per line, so corpora diff cleanly and stream through
standard Unix tooling.  The grammar:

.. code-block:: none

    document     = header sentence*
    header       = "#FORMAT 1" LF "#TAGSET " name LF
    sentence     = "#BOS " id [" %% " comment] LF line* "#EOS " id LF
    line         = terminal | nonterminal
    terminal     = form TAB pos TAB function TAB parent [TAB "*"] LF
    nonterminal  = "#" nodeid TAB category TAB function TAB parent LF

``parent`` is ``0`` for the virtual root, otherwise a nonterminal id (500
or above; ids below 500 are terminal positions and may not be declared).
Lines starting with ``%%`` are comments and are skipped wherever they occur;
blank lines are skipped too.  The optional fifth terminal column ``*`` marks
a POS tag an annotator has not confirmed.  A ``%%`` remark on the ``#BOS``
line is the sentence's own comment and survives round-trips.

Canonical form, produced by :func:`serialize_export`: no free comment lines,
no blank lines, terminals in surface order followed by nonterminals in
ascending id order, the ``*`` column only where POS is unconfirmed, and a
trailing newline.  On canonical input, ``serialize(parse(text)) == text``
byte for byte.

Parsing is total: any input, including arbitrary bytes, either yields a
document whose every graph passes lenient validation or raises
:class:`ExportParseError` carrying the 1-based line number.  Forward
references to nonterminals declared later in the sentence are legal;
reference targets are checked when the sentence ends.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterable

from .graph import (
    MIN_NONTERMINAL_ID,
    MAX_NODE_ID,
    SyntaxGraph,
    Token,
    VIRTUAL_ROOT,
    validate,
)

FORMAT_VERSION = 1

_NODE_LINE = re.compile(r"^#([0-9]+)$")
_INT = re.compile(r"^(?:0|[1-9][0-9]*)$")
_ID = re.compile(r"^\S+$")


class ExportError(ValueError):
    """A graph or document that cannot be written in the export format."""


class ExportParseError(ExportError):
    """Malformed export text; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ExportDocument:
    """A parsed corpus file: tagset name plus graphs in file order."""

    tagset: str
    graphs: tuple[SyntaxGraph, ...]

    def graph(self, sentence_id: str) -> SyntaxGraph:
        for g in self.graphs:
            if g.sentence_id == sentence_id:
                return g
        raise KeyError(sentence_id)


def parse_export(source: str | bytes | IO[str]) -> ExportDocument:
    """Parse export text into an :class:`ExportDocument`.

    Accepts a string, raw bytes (decoded as UTF-8), or a text stream.
    """
    if isinstance(source, bytes):
        try:
            text = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            line = source.count(b"\n", 0, exc.start) + 1
            raise ExportParseError(line, f"undecodable UTF-8 at byte {exc.start}") from None
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()

    lines = text.split("\n")
    # A trailing newline produces one empty trailing chunk; drop just that.
    if lines and lines[-1] == "":
        lines.pop()

    pos = 0

    def take() -> tuple[int, str] | None:
        nonlocal pos
        while pos < len(lines):
            lineno, line = pos + 1, lines[pos]
            pos += 1
            if line == "" or line.startswith("%%"):
                continue
            return lineno, line
        return None

    got = take()
    if got is None or not got[1].startswith("#FORMAT "):
        raise ExportParseError(got[0] if got else 1, "expected '#FORMAT <version>' header")
    version = got[1][len("#FORMAT ") :]
    if not _INT.match(version):
        raise ExportParseError(got[0], f"malformed format version {version!r}")
    if int(version) != FORMAT_VERSION:
        raise ExportParseError(got[0], f"unsupported format version {version}")

    got = take()
    if got is None or not got[1].startswith("#TAGSET "):
        raise ExportParseError(got[0] if got else 2, "expected '#TAGSET <name>' header")
    tagset = got[1][len("#TAGSET ") :]
    if not _ID.match(tagset):
        raise ExportParseError(got[0], f"malformed tagset name {tagset!r}")

    graphs: list[SyntaxGraph] = []
    seen_ids: set[str] = set()
    while True:
        got = take()
        if got is None:
            break
        lineno, line = got
        if not line.startswith("#BOS "):
            raise ExportParseError(lineno, f"expected '#BOS <id>', got {line!r}")
        rest = line[len("#BOS ") :]
        comment: str | None = None
        if " %% " in rest:
            rest, comment = rest.split(" %% ", 1)
        if not _ID.match(rest):
            raise ExportParseError(lineno, f"malformed sentence id {rest!r}")
        if rest in seen_ids:
            raise ExportParseError(lineno, f"duplicate sentence id {rest!r}")
        seen_ids.add(rest)
        graphs.append(_parse_sentence(rest, comment, lineno, take))

    return ExportDocument(tagset=tagset, graphs=tuple(graphs))


def _parse_sentence(sentence_id, comment, bos_line, take) -> SyntaxGraph:
    tokens: list[Token] = []
    nonterminals: dict[int, str] = {}
    parent: dict[int, int] = {}
    edge_label: dict[int, str] = {}

    while True:
        got = take()
        if got is None:
            raise ExportParseError(bos_line, f"sentence {sentence_id!r} has no '#EOS'")
        lineno, line = got
        if line.startswith("#EOS "):
            eos_id = line[len("#EOS ") :]
            if eos_id != sentence_id:
                raise ExportParseError(lineno, f"'#EOS {eos_id}' closes '#BOS {sentence_id}'")
            break
        if line.startswith("#BOS "):
            raise ExportParseError(lineno, f"'#BOS' inside sentence {sentence_id!r}")

        fields = line.split("\t")
        node_match = _NODE_LINE.match(fields[0])
        if node_match:
            if len(fields) != 4:
                raise ExportParseError(lineno, f"expected 4 fields, got {len(fields)}")
            node_id = int(node_match.group(1))
            if not MIN_NONTERMINAL_ID <= node_id <= MAX_NODE_ID:
                raise ExportParseError(
                    lineno,
                    f"nonterminal id {node_id} outside [{MIN_NONTERMINAL_ID}, {MAX_NODE_ID}]",
                )
            if node_id in nonterminals:
                raise ExportParseError(lineno, f"duplicate node id {node_id}")
            category, function, parent_field = fields[1], fields[2], fields[3]
        else:
            if len(fields) == 5 and fields[4] != "*":
                raise ExportParseError(lineno, f"fifth terminal field must be '*', got {fields[4]!r}")
            if len(fields) not in (4, 5):
                raise ExportParseError(lineno, f"expected 4 or 5 fields, got {len(fields)}")
            node_id = len(tokens)
            category, function, parent_field = fields[1], fields[2], fields[3]

        for value in fields[: 4 if node_match else len(fields)]:
            if value == "":
                raise ExportParseError(lineno, "empty field")
        if not _INT.match(parent_field):
            raise ExportParseError(lineno, f"malformed parent id {parent_field!r}")
        par = int(parent_field)
        if par == 0:
            par = VIRTUAL_ROOT
        elif not MIN_NONTERMINAL_ID <= par <= MAX_NODE_ID:
            raise ExportParseError(lineno, f"parent id {par} is not 0 or a nonterminal id")

        if node_match:
            nonterminals[node_id] = category
        else:
            tokens.append(
                Token(position=node_id, form=fields[0], pos=category, pos_reliable=len(fields) == 4)
            )
        parent[node_id] = par
        edge_label[node_id] = function

    for node, par in sorted(parent.items()):
        if par != VIRTUAL_ROOT and par not in nonterminals:
            raise ExportParseError(
                lineno, f"sentence {sentence_id!r}: node {node} attached to undeclared id {par}"
            )

    graph = SyntaxGraph(
        sentence_id=sentence_id,
        tokens=tuple(tokens),
        nonterminals=nonterminals,
        parent=parent,
        edge_label=edge_label,
        comment=comment,
    )
    violations = validate(graph)
    if violations:
        first = violations[0]
        raise ExportParseError(
            lineno, f"sentence {sentence_id!r} is ill-formed: {first.rule}: {first.message}"
        )
    return graph


def _check_field(value: str, what: str, sentence_id: str) -> str:
    if value == "":
        raise ExportError(f"sentence {sentence_id!r}: empty {what}")
    if any(ch == "\t" or ord(ch) < 0x20 or ch == "\x7f" for ch in value):
        raise ExportError(f"sentence {sentence_id!r}: {what} {value!r} contains tab or control characters")
    return value


def _check_form(form: str, sentence_id: str) -> str:
    _check_field(form, "form", sentence_id)
    # Forms that would be read back as directives or node lines are refused
    # outright rather than silently corrupting the file.
    if form.startswith("%%") or _NODE_LINE.match(form):
        raise ExportError(f"sentence {sentence_id!r}: form {form!r} would be misread on parse")
    if re.match(r"^#(BOS|EOS|FORMAT|TAGSET)( |$)", form):
        raise ExportError(f"sentence {sentence_id!r}: form {form!r} would be misread on parse")
    return form


def serialize_export(document: ExportDocument) -> str:
    """Write a document in canonical form.

    Every graph must pass lenient validation; violations are reported with
    their sentence id rather than written out as a corrupt file.
    """
    if not _ID.match(document.tagset):
        raise ExportError(f"malformed tagset name {document.tagset!r}")
    out: list[str] = [f"#FORMAT {FORMAT_VERSION}", f"#TAGSET {document.tagset}"]
    seen: set[str] = set()
    for graph in document.graphs:
        sid = graph.sentence_id
        if not _ID.match(sid):
            raise ExportError(f"malformed sentence id {sid!r}")
        if sid in seen:
            raise ExportError(f"duplicate sentence id {sid!r}")
        seen.add(sid)
        violations = validate(graph)
        if violations:
            first = violations[0]
            raise ExportError(f"sentence {sid!r} is ill-formed: {first.rule}: {first.message}")
        if graph.comment is not None:
            _check_field(graph.comment, "comment", sid)
            out.append(f"#BOS {sid} %% {graph.comment}")
        else:
            out.append(f"#BOS {sid}")
        for token in graph.tokens:
            fields = [
                _check_form(token.form, sid),
                _check_field(token.pos, "pos", sid),
                _check_field(graph.edge_label[token.position], "function", sid),
                _serialize_parent(graph.parent[token.position]),
            ]
            if not token.pos_reliable:
                fields.append("*")
            out.append("\t".join(fields))
        for node in sorted(graph.nonterminals):
            out.append(
                "\t".join(
                    [
                        f"#{node}",
                        _check_field(graph.nonterminals[node], "category", sid),
                        _check_field(graph.edge_label[node], "function", sid),
                        _serialize_parent(graph.parent[node]),
                    ]
                )
            )
        out.append(f"#EOS {sid}")
    return "\n".join(out) + "\n"


def _serialize_parent(par: int) -> str:
    return "0" if par == VIRTUAL_ROOT else str(par)
