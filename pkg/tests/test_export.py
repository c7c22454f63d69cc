"""Round-trip identities, golden bytes, and error positioning for the export format."""

import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treewerk import (
    ExportDocument,
    ExportParseError,
    parse_export,
    serialize_export,
)
from treewerk.export import ExportError

from conftest import baecker_graph, extraposition_graph, flat_graph, random_graph

FIXTURES = Path(__file__).parent / "fixtures"


# -- golden files ---------------------------------------------------------


def test_baecker_golden_bytes():
    document = ExportDocument("stts", (baecker_graph(),))
    assert serialize_export(document) == (FIXTURES / "baecker.export").read_text()


def test_extraposition_golden_bytes():
    document = ExportDocument("stts", (extraposition_graph(),))
    assert serialize_export(document) == (FIXTURES / "extraposition.export").read_text()


def test_baecker_golden_parse():
    document = parse_export((FIXTURES / "baecker.export").read_text())
    assert document.tagset == "stts"
    assert document.graphs == (baecker_graph(),)


def test_extraposition_golden_parse():
    document = parse_export((FIXTURES / "extraposition.export").read_text())
    assert document.graphs == (extraposition_graph(),)


# -- round trips ----------------------------------------------------------


def test_round_trip_random_documents():
    rng = random.Random(300)
    for trial in range(100):
        graphs = tuple(
            random_graph(rng, max_tokens=8, max_nonterminals=4, sentence_id=str(i + 1))
            for i in range(rng.randint(1, 5))
        )
        document = ExportDocument("stts", graphs)
        text = serialize_export(document)
        assert parse_export(text) == document
        # canonical form is a fixpoint
        assert serialize_export(parse_export(text)) == text


def test_parse_accepts_bytes():
    raw = (FIXTURES / "baecker.export").read_bytes()
    assert parse_export(raw) == parse_export(raw.decode("utf-8"))


def test_comments_survive_round_trip():
    graph = flat_graph("9", [("nur", "ADV")])
    graph = type(graph)(
        sentence_id="9",
        tokens=graph.tokens,
        nonterminals={},
        parent=dict(graph.parent),
        edge_label=dict(graph.edge_label),
        comment="checked twice",
    )
    document = ExportDocument("stts", (graph,))
    text = serialize_export(document)
    assert "%% checked twice" in text
    assert parse_export(text).graphs[0].comment == "checked twice"


def test_unreliable_pos_round_trips():
    text = (
        "#FORMAT 1\n#TAGSET stts\n#BOS 1\n"
        "klar\tADJD\t--\t0\t*\n"
        "#EOS 1\n"
    )
    document = parse_export(text)
    assert document.graphs[0].tokens[0].pos_reliable is False
    assert serialize_export(document) == text


# -- tolerated variation --------------------------------------------------


def test_blank_lines_and_comment_lines_skipped():
    text = (
        "\n%% file header note\n#FORMAT 1\n\n#TAGSET stts\n"
        "%% before sentence\n#BOS 1\nnur\tADV\t--\t0\n#EOS 1\n\n"
    )
    document = parse_export(text)
    assert document.graphs[0].tokens[0].form == "nur"


# -- error positioning ----------------------------------------------------


@pytest.mark.parametrize(
    "text,line,needle",
    [
        ("", 1, "FORMAT"),
        ("#FORMAT 2\n#TAGSET stts\n", 1, "version"),
        ("#FORMAT 1\n", 2, "TAGSET"),
        ("#FORMAT 1\n#TAGSET stts\nstray\tNN\t--\t0\n", 3, "expected"),
        ("#FORMAT 1\n#TAGSET stts\n#BOS 1\n#EOS 2\n", 4, "closes"),
        ("#FORMAT 1\n#TAGSET stts\n#BOS 1\nnur\tADV\t--\t0\n", 3, "no '#EOS'"),
        ("#FORMAT 1\n#TAGSET stts\n#BOS 1\nnur\tADV\n#EOS 1\n", 4, "fields"),
        ("#FORMAT 1\n#TAGSET stts\n#BOS 1\nnur\tADV\t--\t7\n#EOS 1\n", 4, "parent"),
        (
            "#FORMAT 1\n#TAGSET stts\n#BOS 1\nnur\tADV\t--\t0\n#BOS 2\n",
            5,
            "inside",
        ),
        (
            "#FORMAT 1\n#TAGSET stts\n#BOS 1\nnur\tADV\t--\t0\n#EOS 1\n"
            "#BOS 1\nnur\tADV\t--\t0\n#EOS 1\n",
            6,
            "duplicate",
        ),
        (
            "#FORMAT 1\n#TAGSET stts\n#BOS 1\nnur\tADV\t--\t0\n#400\tNP\t--\t0\n#EOS 1\n",
            5,
            "outside",
        ),
        (
            "#FORMAT 1\n#TAGSET stts\n#BOS 1\nnur\tADV\t--\t500\n#EOS 1\n",
            5,
            "undeclared",
        ),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, needle):
    with pytest.raises(ExportParseError) as err:
        parse_export(text)
    assert err.value.line == line
    assert needle in str(err.value)


def test_decode_error_position():
    raw = "#FORMAT 1\n#TAGSET stts\n#BOS 1\n".encode() + b"\xff\xfe\n"
    with pytest.raises(ExportParseError) as err:
        parse_export(raw)
    assert err.value.line == 4


def test_structural_violation_reported_at_eos():
    text = (
        "#FORMAT 1\n#TAGSET stts\n#BOS 1\n"
        "nur\tADV\tNK\t501\n"
        "#501\tNP\tHD\t502\n"
        "#502\tPP\tHD\t501\n"
        "#EOS 1\n"
    )
    with pytest.raises(ExportParseError) as err:
        parse_export(text)
    assert err.value.line == 7


# -- serializer guards ----------------------------------------------------


def test_serialize_rejects_tab_in_form():
    graph = flat_graph("1", [("a\tb", "NN")])
    with pytest.raises(ExportError, match="tab"):
        serialize_export(ExportDocument("stts", (graph,)))


def test_serialize_rejects_directive_lookalike_forms():
    for form in ("#BOS", "#EOS 1", "#500", "%% note"):
        graph = flat_graph("1", [(form, "NN")])
        with pytest.raises(ExportError, match="misread"):
            serialize_export(ExportDocument("stts", (graph,)))
    # a leading '#' alone is harmless
    harmless = flat_graph("1", [("#BOSS", "NN"), ("#1a", "NN")])
    text = serialize_export(ExportDocument("stts", (harmless,)))
    assert parse_export(text).graphs[0] == harmless


def test_serialize_rejects_invalid_graph():
    graph = flat_graph("1", [("a", "NN")])
    broken = type(graph)(
        sentence_id="1",
        tokens=graph.tokens,
        nonterminals={500: "NP"},
        parent={0: -1, 500: -1},
        edge_label={0: "--", 500: "--"},
    )
    with pytest.raises(ExportError, match="childless"):
        serialize_export(ExportDocument("stts", (broken,)))


# -- fuzzing --------------------------------------------------------------


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=400))
def test_parser_is_total(text):
    """Arbitrary text either parses or raises a positioned parse error."""
    try:
        parse_export(text)
    except ExportParseError as err:
        assert err.line >= 1


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=400))
def test_parser_is_total_on_bytes(raw):
    try:
        parse_export(raw)
    except ExportParseError as err:
        assert err.line >= 1
