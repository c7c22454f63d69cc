"""Command line entry points.

One executable, one subcommand per workflow step: train and apply the
three model families, project discontinuous structure away, check files,
compare double annotations, query a corpus, and run the annotation
service.  Commands read and write the line-oriented export format and the
JSON model container; everything is deterministic, so reruns on the same
inputs produce byte-identical outputs.

Exit codes follow convention: 0 on success, 1 when the task itself fails
(a file does not validate, input data is unusable), 2 for command line
misuse.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import click

from . import chunker, labeler, projection, tagger
from .compare import agreement_metrics, find_inconsistencies
from .export import ExportDocument, ExportError, parse_export, serialize_export
from .graph import GraphError, SyntaxGraph, VIRTUAL_ROOT
from .inventories import (
    DEFAULT_TAGSET,
    ROOT_LABEL,
    default_categories,
    default_functions,
    default_tagset,
    load_inventory,
)
from .modelio import ModelIOError, load_model, save_model
from .query import QueryError, search as run_search
from .service import create_app, load_config


def _read_export(path: str) -> ExportDocument:
    try:
        with open(path, "rb") as handle:
            return parse_export(handle.read())
    except FileNotFoundError:
        raise click.ClickException(f"no such file: {path}")
    except ExportError as err:
        raise click.ClickException(f"{path}: {err}")


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _load_model(path: str, expected: type, what: str):
    try:
        model = load_model(path)
    except FileNotFoundError:
        raise click.ClickException(f"no such file: {path}")
    except ModelIOError as err:
        raise click.ClickException(f"{path}: {err}")
    if not isinstance(model, expected):
        raise click.ClickException(f"{path} holds a different model kind, expected {what}")
    return model


@click.group()
def main() -> None:
    """Treebank engineering workbench."""


# -- POS tagging ----------------------------------------------------------


@main.command("train-pos")
@click.argument("corpus", type=click.Path(dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--tagset", default=None, help="Tagset name recorded in the model.")
def train_pos(corpus: str, output: str, tagset: str | None) -> None:
    """Train the POS tagging model from an annotated corpus."""
    document = _read_export(corpus)
    sentences = [
        [(token.form, token.pos) for token in graph.tokens] for graph in document.graphs
    ]
    try:
        model = tagger.train_trigram(sentences, tagset=tagset or document.tagset)
    except ValueError as err:
        raise click.ClickException(str(err))
    save_model(model, output)
    click.echo(f"trained on {len(sentences)} sentences, {len(model.tags)} tags -> {output}")


# Worker processes inherit no interpreter state, so the model is loaded
# once per process and kept in a module global.
_WORKER_MODEL = None
_WORKER_THRESHOLD = 0.0


def _tag_init(model_path: str, threshold: float) -> None:
    global _WORKER_MODEL, _WORKER_THRESHOLD
    _WORKER_MODEL = load_model(model_path)
    _WORKER_THRESHOLD = threshold


def _tag_one(forms: list[str]):
    return tagger.tag_pos(_WORKER_MODEL, forms, threshold=_WORKER_THRESHOLD)


@main.command("tag")
@click.argument("model_path", metavar="MODEL", type=click.Path(dir_okay=False))
@click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default="-", type=click.Path(dir_okay=False))
@click.option(
    "--threshold",
    default=tagger.DEFAULT_RELIABILITY_THRESHOLD,
    show_default=True,
    help="Log probability gap below which tags are marked unreliable.",
)
@click.option("--jobs", default=1, show_default=True, help="Worker processes.")
def tag(model_path: str, input_path: str, output: str, threshold: float, jobs: int) -> None:
    """Tag plain text, one whitespace-tokenized sentence per line."""
    model = _load_model(model_path, tagger.TrigramModel, "pos")
    try:
        with open(input_path, "r", encoding="utf-8") as handle:
            lines = [line.split() for line in handle if line.strip()]
    except FileNotFoundError:
        raise click.ClickException(f"no such file: {input_path}")
    if not lines:
        raise click.ClickException(f"{input_path}: no sentences")

    if jobs > 1:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_tag_init, initargs=(model_path, threshold)
        ) as pool:
            results = list(pool.map(_tag_one, lines, chunksize=16))
    else:
        results = [tagger.tag_pos(model, forms, threshold=threshold) for forms in lines]

    graphs = []
    for index, (forms, result) in enumerate(zip(lines, results), start=1):
        graphs.append(_flat_graph(str(index), forms, result.tags, result.unreliable))
    text = serialize_export(ExportDocument(tagset=model.tagset, graphs=tuple(graphs)))
    _write_text(output, text)


def _flat_graph(sentence_id, forms, tags, unreliable=frozenset()) -> SyntaxGraph:
    from .graph import Token

    tokens = tuple(
        Token(position=i, form=form, pos=tag, pos_reliable=i not in unreliable)
        for i, (form, tag) in enumerate(zip(forms, tags))
    )
    return SyntaxGraph(
        sentence_id=sentence_id,
        tokens=tokens,
        nonterminals={},
        parent={i: VIRTUAL_ROOT for i in range(len(tokens))},
        edge_label={i: ROOT_LABEL for i in range(len(tokens))},
    )


# -- function labeling ----------------------------------------------------


@main.command("train-labeler")
@click.argument("corpus", type=click.Path(dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--order", default=2, show_default=True, type=click.IntRange(1, 2))
@click.option("--no-priors", is_flag=True, help="Score categories without priors.")
def train_labeler(corpus: str, output: str, order: int, no_priors: bool) -> None:
    """Train the function labeling model from an annotated corpus."""
    document = _read_export(corpus)
    try:
        model = labeler.train_labeler(document.graphs, order=order, use_priors=not no_priors)
    except ValueError as err:
        raise click.ClickException(str(err))
    save_model(model, output)
    click.echo(
        f"trained on {model.total_events} phrases, {len(model.models)} categories -> {output}"
    )


@main.command("label")
@click.argument("model_path", metavar="MODEL", type=click.Path(dir_okay=False))
@click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default="-", type=click.Path(dir_okay=False))
@click.option(
    "--threshold",
    default=tagger.DEFAULT_RELIABILITY_THRESHOLD,
    show_default=True,
)
def label(model_path: str, input_path: str, output: str, threshold: float) -> None:
    """Replace edge labels in an annotated file with model assignments.

    Every nonterminal keeps its category; the labels of its children are
    redecided per phrase.  Nodes hanging off the virtual root keep the
    unassigned label.
    """
    model = _load_model(model_path, labeler.LabelerModel, "labeler")
    document = _read_export(input_path)
    relabeled = []
    for graph in document.graphs:
        edge_label = dict(graph.edge_label)
        for node in sorted(graph.nonterminals):
            children = graph.children(node)
            child_tags = [
                graph.tokens[c].pos if graph.is_terminal(c) else graph.category(c)
                for c in children
            ]
            try:
                result = labeler.label_phrase(
                    model, child_tags, known_category=graph.category(node), threshold=threshold
                )
            except ValueError as err:
                raise click.ClickException(f"sentence {graph.sentence_id}: {err}")
            for child, new_label in zip(children, result.labels):
                edge_label[child] = new_label
        relabeled.append(replace(graph, edge_label=edge_label))
    text = serialize_export(ExportDocument(tagset=document.tagset, graphs=tuple(relabeled)))
    _write_text(output, text)


# -- chunk structuring ----------------------------------------------------


@main.command("train-chunker")
@click.argument("corpus", type=click.Path(dir_okay=False))
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
@click.option("--order", default=2, show_default=True, type=click.IntRange(1, 2))
@click.option(
    "--category",
    "categories",
    multiple=True,
    help="Phrase category to model; repeatable.  Defaults to NP, PP, AP.",
)
def train_chunker(corpus: str, output: str, order: int, categories: tuple[str, ...]) -> None:
    """Train the chunk structuring model from an annotated corpus."""
    document = _read_export(corpus)
    try:
        model = chunker.train_chunk(
            document.graphs,
            categories=categories or chunker.DEFAULT_CHUNK_CATEGORIES,
            order=order,
        )
    except ValueError as err:
        raise click.ClickException(str(err))
    save_model(model, output)
    skipped = f", {model.skipped} phrases outside the encodable class" if model.skipped else ""
    click.echo(f"trained {len(model.submodels)} submodels{skipped} -> {output}")


@main.command("chunk")
@click.argument("model_path", metavar="MODEL", type=click.Path(dir_okay=False))
@click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default="-", type=click.Path(dir_okay=False))
@click.option("--category", default="NP", show_default=True)
@click.option(
    "--threshold",
    default=tagger.DEFAULT_RELIABILITY_THRESHOLD,
    show_default=True,
)
def chunk(model_path: str, input_path: str, output: str, category: str, threshold: float) -> None:
    """Structure flat tagged sentences as phrases of one category."""
    model = _load_model(model_path, chunker.ChunkModel, "chunker")
    document = _read_export(input_path)
    structured = []
    for graph in document.graphs:
        if graph.nonterminals:
            raise click.ClickException(
                f"sentence {graph.sentence_id} already has structure"
            )
        span = [(token.form, token.pos) for token in graph.tokens]
        try:
            fragment, _reliable = chunker.structure_chunk(
                model, span, category, threshold=threshold
            )
        except ValueError as err:
            raise click.ClickException(f"sentence {graph.sentence_id}: {err}")
        structured.append(replace(fragment, sentence_id=graph.sentence_id, comment=graph.comment))
    text = serialize_export(ExportDocument(tagset=document.tagset, graphs=tuple(structured)))
    _write_text(output, text)


# -- projection -----------------------------------------------------------


@main.command("project")
@click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False))
@click.option("-o", "--output", default="-", type=click.Path(dir_okay=False))
def project(input_path: str, output: str) -> None:
    """Project crossing structures onto continuous trees with traces.

    Trace bindings are recorded in the sentence comment so the original
    attachment stays recoverable from the file alone.
    """
    document = _read_export(input_path)
    projected = []
    for graph in document.graphs:
        try:
            result, table = projection.to_phenogrammatical(graph)
        except GraphError as err:
            raise click.ClickException(f"sentence {graph.sentence_id}: {err}")
        if table.entries:
            note = "traces " + " ".join(
                f"T{e.trace_id}:moved={e.moved_node},host={e.host},"
                f"label={e.label},synthetic={int(e.synthetic)}"
                for e in table.entries
            )
            comment = f"{result.comment} | {note}" if result.comment else note
            result = replace(result, comment=comment)
        projected.append(result)
    text = serialize_export(ExportDocument(tagset=document.tagset, graphs=tuple(projected)))
    _write_text(output, text)


# -- checking and comparison ----------------------------------------------


@main.command("validate")
@click.argument("input_path", metavar="INPUT", type=click.Path(dir_okay=False))
@click.option("--strict", is_flag=True, help="Also check labels against the inventories.")
@click.option("--tagset", default=None, type=click.Path(dir_okay=False), help="Tagset file.")
@click.option("--categories", default=None, type=click.Path(dir_okay=False))
@click.option("--functions", default=None, type=click.Path(dir_okay=False))
def validate_command(
    input_path: str,
    strict: bool,
    tagset: str | None,
    categories: str | None,
    functions: str | None,
) -> None:
    """Check a file; exit 1 when any sentence violates an invariant."""
    from .graph import validate

    document = _read_export(input_path)
    kwargs = {}
    if strict:
        kwargs = {
            "tagset": load_inventory(tagset) if tagset else default_tagset(),
            "categories": load_inventory(categories) if categories else default_categories(),
            "functions": load_inventory(functions) if functions else default_functions(),
        }
    total = 0
    for graph in document.graphs:
        for violation in validate(graph, strict=strict, **kwargs):
            total += 1
            click.echo(
                f"{graph.sentence_id}\t{violation.rule}\tnode {violation.node}\t"
                f"{violation.message}"
            )
    if total:
        click.echo(f"{total} violations in {len(document.graphs)} sentences")
        sys.exit(1)
    click.echo(f"{len(document.graphs)} sentences, no violations")


@main.command("compare")
@click.argument("left_path", metavar="LEFT", type=click.Path(dir_okay=False))
@click.argument("right_path", metavar="RIGHT", type=click.Path(dir_okay=False))
def compare_command(left_path: str, right_path: str) -> None:
    """List disagreements between two annotations of the same sentences."""
    left = _read_export(left_path)
    right = _read_export(right_path)
    right_map = {g.sentence_id: g for g in right.graphs}
    matched = 0
    left_total = 0
    right_total = 0
    compared = 0
    for graph in left.graphs:
        other = right_map.get(graph.sentence_id)
        if other is None:
            click.echo(f"{graph.sentence_id}: only in {left_path}")
            continue
        inconsistencies = find_inconsistencies(graph, other)
        click.echo(f"{graph.sentence_id}: {len(inconsistencies)} inconsistencies")
        for inc in inconsistencies:
            positions = ",".join(str(p) for p in inc.positions)
            click.echo(f"  {inc.kind.value} @ {positions}: {inc.detail}")
        try:
            metrics = agreement_metrics(graph, other)
        except ValueError:
            continue
        compared += 1
        matched += metrics.matched
        left_total += metrics.left_total
        right_total += metrics.right_total
    for graph in right.graphs:
        if graph.sentence_id not in {g.sentence_id for g in left.graphs}:
            click.echo(f"{graph.sentence_id}: only in {right_path}")
    if compared:
        precision = matched / right_total if right_total else 0.0
        recall = matched / left_total if left_total else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        click.echo(
            f"labeled precision={precision:.4f} recall={recall:.4f} f1={f1:.4f} "
            f"over {compared} sentences"
        )


@main.command("search")
@click.argument("corpus", type=click.Path(dir_okay=False))
@click.argument("query")
def search_command(corpus: str, query: str) -> None:
    """Run a query; one line per match with its variable bindings."""
    document = _read_export(corpus)
    try:
        matches = run_search(document.graphs, query)
    except QueryError as err:
        raise click.UsageError(str(err))
    for match in matches:
        bindings = " ".join(f"{name}={node}" for name, node in match.bindings.items())
        click.echo(f"{match.sentence_id}\t{bindings}")


# -- service --------------------------------------------------------------


@main.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path(dir_okay=False))
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
def serve(config_path: str | None, host: str | None, port: int | None) -> None:
    """Run the annotation service."""
    import uvicorn

    try:
        config = load_config(config_path)
    except (OSError, ValueError) as err:
        raise click.ClickException(f"bad config: {err}")
    if host is not None:
        config = replace(config, host=host)
    if port is not None:
        config = replace(config, port=port)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
