"""HTTP service backing interactive annotation.

The service owns corpora on disk and hands out sentences to annotation
clients over JSON.  Clients never send whole graphs back; they send small
structured edits, which keeps every mutation inside the invariants that
:func:`~treewerk.graph.build_increment` and validation enforce:

* ``group``: attach currently unattached nodes under a fresh nonterminal,
* ``relabel``: change a node's category or edge function,
* ``dissolve``: delete a nonterminal, handing its children to its parent.

Each sentence carries a version counter.  An edit batch names the version
it was computed against and is rejected with 409 when the sentence has
moved on, so two clients cannot silently overwrite each other.  Accepted
batches are applied atomically: the corpus file is rewritten via a
temporary file, the version sidecar alongside it, and one line per batch
is appended to an audit log.  Responses contain no clocks or random
values; the same requests against the same corpus produce the same bytes.

The increment endpoint is advisory: given a selection it proposes function
labels (and, for a chunkable span, internal structure) from the configured
models without touching the corpus.  Everything stateful goes through the
edits endpoint.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import chunker, labeler
from .compare import agreement_metrics, find_inconsistencies
from .export import FORMAT_VERSION, ExportDocument, ExportError, parse_export, serialize_export
from .graph import GraphError, SyntaxGraph, VIRTUAL_ROOT, build_increment, validate
from .inventories import ROOT_LABEL
from .modelio import CONTAINER_VERSION, load_model
from .query import QueryError, parse_query, search
from .tagger import DEFAULT_RELIABILITY_THRESHOLD

DEFAULT_PORT = 8571
DEFAULT_MAX_INCREMENT_SPAN = 30


@dataclass(frozen=True)
class ServiceConfig:
    corpus_root: str = "."
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    max_increment_span: int = DEFAULT_MAX_INCREMENT_SPAN
    reliability_threshold: float = DEFAULT_RELIABILITY_THRESHOLD
    pos_model: str | None = None
    labeler_model: str | None = None
    chunker_model: str | None = None


def load_config(path: str | None) -> ServiceConfig:
    """Build the configuration from a JSON file and the environment.

    Paths in the file are taken relative to the file itself.  The
    environment variables TREEWERK_PORT and TREEWERK_CORPUS_ROOT override
    the file, so one config can serve several checkouts.
    """
    config = ServiceConfig()
    if path is not None:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        unknown = set(data) - set(ServiceConfig.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        base = os.path.dirname(os.path.abspath(path))
        for key in ("corpus_root", "pos_model", "labeler_model", "chunker_model"):
            if data.get(key) is not None:
                data[key] = os.path.join(base, data[key])
        config = replace(config, **data)
    if os.environ.get("TREEWERK_PORT"):
        config = replace(config, port=int(os.environ["TREEWERK_PORT"]))
    if os.environ.get("TREEWERK_CORPUS_ROOT"):
        config = replace(config, corpus_root=os.environ["TREEWERK_CORPUS_ROOT"])
    return config


# -- wire format ----------------------------------------------------------


def graph_payload(graph: SyntaxGraph) -> dict:
    """The JSON view of a sentence that clients render and select from."""

    def parent_of(node: int) -> int | None:
        parent = graph.parent.get(node, VIRTUAL_ROOT)
        return None if parent == VIRTUAL_ROOT else parent

    return {
        "id": graph.sentence_id,
        "comment": graph.comment,
        "tokens": [
            {
                "position": token.position,
                "form": token.form,
                "pos": token.pos,
                "reliable": token.pos_reliable,
                "parent": parent_of(token.position),
                "label": graph.edge_label.get(token.position, ROOT_LABEL),
            }
            for token in graph.tokens
        ],
        "nodes": [
            {
                "id": node,
                "category": graph.nonterminals[node],
                "parent": parent_of(node),
                "label": graph.edge_label.get(node, ROOT_LABEL),
            }
            for node in sorted(graph.nonterminals)
        ],
        "discontinuous": sorted(
            node for node in graph.nonterminals if graph.is_discontinuous(node)
        ),
    }


def _inconsistency_payload(inc) -> dict:
    return {
        "kind": inc.kind.value,
        "positions": list(inc.positions),
        "left": inc.left,
        "right": inc.right,
        "detail": inc.detail,
    }


def _metrics_payload(metrics) -> dict:
    return {
        "precision": metrics.precision,
        "recall": metrics.recall,
        "f1": metrics.f1,
        "matched": metrics.matched,
        "left_total": metrics.left_total,
        "right_total": metrics.right_total,
        "label_agreements": metrics.label_agreements,
        "label_comparisons": metrics.label_comparisons,
    }


# -- corpus state ---------------------------------------------------------


class _Corpus:
    """One export file held in memory, plus its version sidecar."""

    def __init__(self, path: str, relative: str):
        self.path = path
        self.relative = relative
        with open(path, "rb") as handle:
            document = parse_export(handle.read())
        self.tagset = document.tagset
        self.order = [g.sentence_id for g in document.graphs]
        self.graphs = {g.sentence_id: g for g in document.graphs}
        self.versions: dict[str, int] = {sid: 0 for sid in self.order}
        if os.path.exists(self._versions_path()):
            with open(self._versions_path(), "r", encoding="utf-8") as handle:
                stored = json.load(handle)
            self.versions.update({k: v for k, v in stored.items() if k in self.graphs})

    def _versions_path(self) -> str:
        return self.path + ".versions.json"

    def _audit_path(self) -> str:
        return self.path + ".audit.jsonl"

    def save(self) -> None:
        document = ExportDocument(
            tagset=self.tagset, graphs=tuple(self.graphs[sid] for sid in self.order)
        )
        text = serialize_export(document)
        _atomic_write(self.path, text)
        _atomic_write(
            self._versions_path(),
            json.dumps(self.versions, sort_keys=True, separators=(",", ":")) + "\n",
        )

    def audit(self, record: dict) -> None:
        with open(self._audit_path(), "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


@dataclass
class _Session:
    id: str
    corpus: _Corpus
    annotator: str


# -- request bodies -------------------------------------------------------


class SessionRequest(BaseModel):
    corpus: str
    annotator: str = "anonymous"


class IncrementRequest(BaseModel):
    selected: list[int]
    category: str | None = None


class EditsRequest(BaseModel):
    version: int
    edits: list[dict]


# -- edit application -----------------------------------------------------


def _apply_edit(graph: SyntaxGraph, edit: dict) -> SyntaxGraph:
    kind = edit.get("kind")
    if kind == "group":
        labels = {int(node): label for node, label in dict(edit["labels"]).items()}
        return build_increment(graph, [int(n) for n in edit["selected"]], edit["category"], labels)
    if kind == "relabel":
        node = int(edit["node"])
        if not graph.has_node(node):
            raise GraphError(f"unknown node {node}")
        nonterminals = dict(graph.nonterminals)
        edge_label = dict(graph.edge_label)
        if edit.get("category") is not None:
            if graph.is_terminal(node):
                raise GraphError(f"node {node} is a terminal, it has no category")
            nonterminals[node] = edit["category"]
        if edit.get("label") is not None:
            if node not in edge_label:
                raise GraphError(f"node {node} has no edge to relabel")
            edge_label[node] = edit["label"]
        if edit.get("category") is None and edit.get("label") is None:
            raise GraphError("relabel changes nothing")
        return SyntaxGraph(
            sentence_id=graph.sentence_id,
            tokens=graph.tokens,
            nonterminals=nonterminals,
            parent=graph.parent,
            edge_label=edge_label,
            comment=graph.comment,
        )
    if kind == "dissolve":
        node = int(edit["node"])
        if node not in graph.nonterminals:
            raise GraphError(f"no nonterminal {node}")
        parent_of_node = graph.parent[node]
        nonterminals = dict(graph.nonterminals)
        parent = dict(graph.parent)
        edge_label = dict(graph.edge_label)
        for child in graph.children(node):
            parent[child] = parent_of_node
            if parent_of_node == VIRTUAL_ROOT:
                edge_label[child] = ROOT_LABEL
        del nonterminals[node]
        del parent[node]
        del edge_label[node]
        return SyntaxGraph(
            sentence_id=graph.sentence_id,
            tokens=graph.tokens,
            nonterminals=nonterminals,
            parent=parent,
            edge_label=edge_label,
            comment=graph.comment,
        )
    raise GraphError(f"unknown edit kind {kind!r}")


# -- application ----------------------------------------------------------


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="treewerk annotation service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    models = {
        "pos": load_model(config.pos_model) if config.pos_model else None,
        "labeler": load_model(config.labeler_model) if config.labeler_model else None,
        "chunker": load_model(config.chunker_model) if config.chunker_model else None,
    }
    model_names = {
        kind: os.path.basename(path) if path else None
        for kind, path in (
            ("pos", config.pos_model),
            ("labeler", config.labeler_model),
            ("chunker", config.chunker_model),
        )
    }
    corpora: dict[str, _Corpus] = {}
    sessions: dict[str, _Session] = {}
    counter = {"sessions": 0}

    def meta(corpus: _Corpus | None = None) -> dict:
        return {
            "corpus": corpus.relative if corpus else None,
            "models": model_names,
            "format_version": FORMAT_VERSION,
            "container_version": CONTAINER_VERSION,
        }

    def resolve_corpus(relative: str) -> _Corpus:
        root = os.path.abspath(config.corpus_root)
        path = os.path.abspath(os.path.join(root, relative))
        if os.path.commonpath([root, path]) != root:
            raise HTTPException(status_code=400, detail="corpus path escapes the corpus root")
        if path not in corpora:
            if not os.path.exists(path):
                raise HTTPException(status_code=404, detail=f"no corpus at {relative!r}")
            try:
                corpora[path] = _Corpus(path, relative)
            except ExportError as err:
                raise HTTPException(status_code=422, detail=f"unreadable corpus: {err}")
        return corpora[path]

    def get_session(session_id: str) -> _Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return session

    def get_graph(session: _Session, sentence_id: str) -> SyntaxGraph:
        graph = session.corpus.graphs.get(sentence_id)
        if graph is None:
            raise HTTPException(status_code=404, detail=f"no sentence {sentence_id!r}")
        return graph

    @app.get("/meta")
    def service_meta() -> dict:
        return meta()

    @app.post("/sessions")
    def open_session(body: SessionRequest) -> dict:
        corpus = resolve_corpus(body.corpus)
        counter["sessions"] += 1
        session = _Session(id=f"s{counter['sessions']}", corpus=corpus, annotator=body.annotator)
        sessions[session.id] = session
        return {
            "session": session.id,
            "annotator": session.annotator,
            "tagset": corpus.tagset,
            "sentences": list(corpus.order),
            "versions": dict(corpus.versions),
            "meta": meta(corpus),
        }

    @app.get("/sessions/{session_id}/sentences/{sentence_id}")
    def get_sentence(session_id: str, sentence_id: str) -> dict:
        session = get_session(session_id)
        graph = get_graph(session, sentence_id)
        return {
            "sentence": graph_payload(graph),
            "version": session.corpus.versions[sentence_id],
            "meta": meta(session.corpus),
        }

    @app.post("/sessions/{session_id}/sentences/{sentence_id}/increment")
    def propose_increment(session_id: str, sentence_id: str, body: IncrementRequest) -> dict:
        session = get_session(session_id)
        graph = get_graph(session, sentence_id)
        selected = body.selected
        if not selected:
            raise HTTPException(status_code=422, detail="empty selection")
        if len(set(selected)) != len(selected):
            raise HTTPException(status_code=422, detail="selection repeats a node")
        for node in selected:
            if not graph.has_node(node):
                raise HTTPException(status_code=422, detail=f"unknown node {node}")
            if graph.parent.get(node) != VIRTUAL_ROOT:
                raise HTTPException(status_code=422, detail=f"node {node} is already attached")
        covered = sorted(p for node in selected for p in graph.yield_of(node))
        span = covered[-1] - covered[0] + 1
        if span > config.max_increment_span:
            raise HTTPException(
                status_code=422,
                detail=f"selection spans {span} tokens, limit is {config.max_increment_span}",
            )

        ordered = sorted(selected, key=lambda n: min(graph.yield_of(n)))
        child_tags = [
            graph.tokens[n].pos if graph.is_terminal(n) else graph.category(n)
            for n in ordered
        ]
        proposal: dict = {
            "selected": ordered,
            "child_tags": child_tags,
            "category": body.category,
            "category_reliable": None,
            "labels": None,
            "chunk": None,
        }
        if models["labeler"] is not None:
            try:
                result = labeler.label_phrase(
                    models["labeler"],
                    child_tags,
                    known_category=body.category,
                    threshold=config.reliability_threshold,
                )
            except ValueError:
                result = None
            if result is not None:
                proposal["category"] = result.category
                proposal["category_reliable"] = result.category_reliable
                proposal["labels"] = [
                    {"node": node, "label": label, "reliable": reliable}
                    for node, label, reliable in zip(
                        ordered, result.labels, result.label_reliable
                    )
                ]
        chunk_model = models["chunker"]
        category = proposal["category"]
        contiguous = all(graph.is_terminal(n) for n in ordered) and covered == list(
            range(covered[0], covered[-1] + 1)
        )
        if chunk_model is not None and category in chunk_model.submodels and contiguous:
            span_tokens = [(graph.tokens[n].form, graph.tokens[n].pos) for n in ordered]
            try:
                fragment, reliable = chunker.structure_chunk(
                    chunk_model, span_tokens, category, threshold=config.reliability_threshold
                )
            except ValueError:
                fragment, reliable = None, None
            if fragment is not None:
                proposal["chunk"] = {
                    "structure": graph_payload(fragment),
                    "reliable": reliable,
                }
        return {
            "proposal": proposal,
            "version": session.corpus.versions[sentence_id],
            "meta": meta(session.corpus),
        }

    @app.post("/sessions/{session_id}/sentences/{sentence_id}/edits")
    def apply_edits(session_id: str, sentence_id: str, body: EditsRequest) -> dict:
        session = get_session(session_id)
        corpus = session.corpus
        graph = get_graph(session, sentence_id)
        current = corpus.versions[sentence_id]
        if body.version != current:
            raise HTTPException(
                status_code=409,
                detail=f"sentence {sentence_id!r} is at version {current}, "
                f"edit was computed against {body.version}",
            )
        if not body.edits:
            raise HTTPException(status_code=422, detail="empty edit batch")
        working = graph
        try:
            for edit in body.edits:
                working = _apply_edit(working, edit)
        except (GraphError, KeyError, TypeError, ValueError) as err:
            raise HTTPException(status_code=422, detail=f"edit rejected: {err}")
        violations = validate(working)
        if violations:
            first = violations[0]
            raise HTTPException(
                status_code=422, detail=f"result is ill-formed: {first.rule}: {first.message}"
            )
        corpus.graphs[sentence_id] = working
        corpus.versions[sentence_id] = current + 1
        corpus.save()
        corpus.audit(
            {
                "sentence": sentence_id,
                "base_version": current,
                "new_version": current + 1,
                "session": session.id,
                "annotator": session.annotator,
                "edits": body.edits,
            }
        )
        return {
            "sentence": graph_payload(working),
            "version": corpus.versions[sentence_id],
            "meta": meta(corpus),
        }

    @app.post("/compare")
    def compare_corpora(body: dict) -> dict:
        left = resolve_corpus(str(body.get("left", "")))
        right = resolve_corpus(str(body.get("right", "")))
        shared = [sid for sid in left.order if sid in right.graphs]
        sentences = []
        for sid in shared:
            inconsistencies = find_inconsistencies(left.graphs[sid], right.graphs[sid])
            entry: dict = {
                "sentence": sid,
                "inconsistencies": [_inconsistency_payload(i) for i in inconsistencies],
            }
            try:
                entry["metrics"] = _metrics_payload(
                    agreement_metrics(left.graphs[sid], right.graphs[sid])
                )
            except ValueError:
                entry["metrics"] = None
            sentences.append(entry)
        return {
            "left": left.relative,
            "right": right.relative,
            "sentences": sentences,
            "only_left": [sid for sid in left.order if sid not in right.graphs],
            "only_right": [sid for sid in right.order if sid not in left.graphs],
            "meta": meta(),
        }

    @app.get("/search")
    def search_corpus(corpus: str, q: str) -> dict:
        state = resolve_corpus(corpus)
        try:
            query = parse_query(q)
        except QueryError as err:
            raise HTTPException(status_code=422, detail=str(err))
        matches = search((state.graphs[sid] for sid in state.order), query)
        return {
            "query": q,
            "matches": [
                {"sentence": m.sentence_id, "bindings": m.bindings} for m in matches
            ],
            "count": len(matches),
            "meta": meta(state),
        }

    return app
