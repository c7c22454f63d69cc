"""Persistence for trained models.

All three model families share one single-file JSON container:

    {"container": "treewerk-model", "version": 1, "kind": ..., "payload": ...}

``kind`` is ``pos``, ``labeler``, or ``chunker`` and selects the payload
codec.  Serialization is canonical (sorted keys, fixed separators, counts
as plain integers), so saving the same model twice produces identical
bytes and models can be diffed or checksummed.

Markov states appear in three shapes and are encoded by JSON type: the
boundary marker as ``null``, plain labels as strings, and relative
structure tags as ``[delta, [categories...]]`` arrays.  Count tables keyed
by state tuples are stored as sorted rows because JSON objects cannot key
on arrays.
"""

from __future__ import annotations

import json
from typing import Any, IO

from .chunker import ChunkModel, ChunkSubmodel, RelTag
from .labeler import LabelerModel, PhraseModel
from .markov import BOUNDARY, TransitionModel
from .tagger import TrigramModel

CONTAINER_NAME = "treewerk-model"
CONTAINER_VERSION = 1

Model = TrigramModel | LabelerModel | ChunkModel


class ModelIOError(ValueError):
    pass


def _encode_state(state: Any) -> Any:
    if state is BOUNDARY:
        return None
    if isinstance(state, str):
        return state
    if isinstance(state, RelTag):
        return [state.delta, list(state.opened)]
    raise ModelIOError(f"cannot encode state {state!r}")


def _decode_state(value: Any) -> Any:
    if value is None:
        return BOUNDARY
    if isinstance(value, str):
        return value
    if isinstance(value, list):
        return RelTag(value[0], tuple(value[1]))
    raise ModelIOError(f"cannot decode state {value!r}")


def _state_sort_key(state: Any) -> tuple:
    if state is BOUNDARY:
        return (0,)
    if isinstance(state, str):
        return (1, state)
    return (2, state.delta, state.opened)


def _encode_counts(counts: dict, width: int) -> list:
    def key(item: tuple) -> tuple:
        states = item[0] if width > 1 else (item[0],)
        return tuple(_state_sort_key(s) for s in states)

    rows = []
    for states, count in sorted(counts.items(), key=key):
        if width == 1:
            rows.append([_encode_state(states), count])
        else:
            rows.append([_encode_state(s) for s in states] + [count])
    return rows


def _decode_counts(rows: list, width: int) -> dict:
    out = {}
    for row in rows:
        if width == 1:
            out[_decode_state(row[0])] = row[1]
        else:
            out[tuple(_decode_state(v) for v in row[:width])] = row[width]
    return out


def _encode_transitions(model: TransitionModel) -> dict:
    return {
        "order": model.order,
        "states": [_encode_state(s) for s in model.states],
        "uni": _encode_counts(model.uni, 1),
        "bi": _encode_counts(model.bi, 2),
        "tri": _encode_counts(model.tri, 3),
        "n_real": model.n_real,
        "n_sequences": model.n_sequences,
        "lambdas": list(model.lambdas),
    }


def _decode_transitions(data: dict) -> TransitionModel:
    return TransitionModel(
        order=data["order"],
        states=tuple(_decode_state(s) for s in data["states"]),
        uni=_decode_counts(data["uni"], 1),
        bi=_decode_counts(data["bi"], 2),
        tri=_decode_counts(data["tri"], 3),
        n_real=data["n_real"],
        n_sequences=data["n_sequences"],
        lambdas=tuple(data["lambdas"]),
    )


def _nested(counts: dict[str, dict[str, int]]) -> dict:
    return {outer: dict(sorted(inner.items())) for outer, inner in sorted(counts.items())}


def _encode_pos(model: TrigramModel) -> dict:
    return {
        "tagset": model.tagset,
        "transitions": _encode_transitions(model.transitions),
        "lexicon": _nested(model.lexicon),
        "suffixes": [
            [suffix, capitalized, dict(sorted(tags.items()))]
            for (suffix, capitalized), tags in sorted(model.suffix_counts.items())
        ],
    }


def _decode_pos(data: dict) -> TrigramModel:
    return TrigramModel(
        tagset=data["tagset"],
        transitions=_decode_transitions(data["transitions"]),
        lexicon={form: dict(tags) for form, tags in data["lexicon"].items()},
        suffix_counts={
            (suffix, capitalized): dict(tags)
            for suffix, capitalized, tags in data["suffixes"]
        },
    )


def _encode_labeler(model: LabelerModel) -> dict:
    return {
        "order": model.order,
        "use_priors": model.use_priors,
        "total_events": model.total_events,
        "child_alphabet": list(model.child_alphabet),
        "models": {
            category: {
                "transitions": _encode_transitions(phrase.transitions),
                "emissions": _nested(phrase.emissions),
                "events": phrase.events,
            }
            for category, phrase in sorted(model.models.items())
        },
    }


def _decode_labeler(data: dict) -> LabelerModel:
    return LabelerModel(
        models={
            category: PhraseModel(
                category=category,
                transitions=_decode_transitions(sub["transitions"]),
                emissions={k: dict(v) for k, v in sub["emissions"].items()},
                events=sub["events"],
            )
            for category, sub in data["models"].items()
        },
        child_alphabet=tuple(data["child_alphabet"]),
        order=data["order"],
        use_priors=data["use_priors"],
        total_events=data["total_events"],
    )


def _encode_chunker(model: ChunkModel) -> dict:
    return {
        "order": model.order,
        "skipped": model.skipped,
        "pos_alphabet": list(model.pos_alphabet),
        "submodels": {
            category: {
                "transitions": _encode_transitions(sub.transitions),
                "emissions": [
                    [_encode_state(tag), dict(sorted(by_pos.items()))]
                    for tag, by_pos in sorted(
                        sub.emissions.items(), key=lambda item: _state_sort_key(item[0])
                    )
                ],
                "events": sub.events,
            }
            for category, sub in sorted(model.submodels.items())
        },
    }


def _decode_chunker(data: dict) -> ChunkModel:
    return ChunkModel(
        submodels={
            category: ChunkSubmodel(
                category=category,
                transitions=_decode_transitions(sub["transitions"]),
                emissions={
                    _decode_state(tag): dict(by_pos) for tag, by_pos in sub["emissions"]
                },
                events=sub["events"],
            )
            for category, sub in data["submodels"].items()
        },
        pos_alphabet=tuple(data["pos_alphabet"]),
        order=data["order"],
        skipped=data["skipped"],
    )


_CODECS = {
    "pos": (TrigramModel, _encode_pos, _decode_pos),
    "labeler": (LabelerModel, _encode_labeler, _decode_labeler),
    "chunker": (ChunkModel, _encode_chunker, _decode_chunker),
}


def model_kind(model: Model) -> str:
    for kind, (cls, _, _) in _CODECS.items():
        if isinstance(model, cls):
            return kind
    raise ModelIOError(f"not a saveable model: {type(model).__name__}")


def dumps_model(model: Model) -> str:
    kind = model_kind(model)
    _, encode, _ = _CODECS[kind]
    document = {
        "container": CONTAINER_NAME,
        "version": CONTAINER_VERSION,
        "kind": kind,
        "payload": encode(model),
    }
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def loads_model(text: str | bytes) -> Model:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelIOError(f"not valid JSON: {err}") from None
    if not isinstance(document, dict) or document.get("container") != CONTAINER_NAME:
        raise ModelIOError("not a model container")
    if document.get("version") != CONTAINER_VERSION:
        raise ModelIOError(
            f"unsupported container version {document.get('version')!r}; "
            f"this build reads version {CONTAINER_VERSION}"
        )
    kind = document.get("kind")
    if kind not in _CODECS:
        raise ModelIOError(f"unknown model kind {kind!r}")
    _, _, decode = _CODECS[kind]
    return decode(document["payload"])


def save_model(model: Model, path: str | IO[str]) -> None:
    text = dumps_model(model) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def load_model(path: str | IO[str]) -> Model:
    if hasattr(path, "read"):
        return loads_model(path.read())
    with open(path, "r", encoding="utf-8") as handle:
        return loads_model(handle.read())
