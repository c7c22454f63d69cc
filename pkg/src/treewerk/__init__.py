"""Treebank engineering workbench.

Data model and validation for constituent graphs with crossing branches,
a line-oriented exchange format, projection onto continuous trees with
traces, three statistical assistants (POS tagging, function labeling,
chunk structuring), double-annotation comparison, a corpus query
language, and an HTTP service for interactive annotation.
"""

from .chunker import (
    ChunkError,
    ChunkModel,
    RelTag,
    decode_relative,
    encode_relative,
    structure_chunk,
    train_chunk,
)
from .compare import (
    AgreementMetrics,
    Inconsistency,
    InconsistencyKind,
    agreement_metrics,
    find_inconsistencies,
)
from .export import (
    ExportDocument,
    ExportError,
    ExportParseError,
    parse_export,
    serialize_export,
)
from .graph import (
    GraphError,
    SyntaxGraph,
    Token,
    Violation,
    build_increment,
    next_node_id,
    validate,
)
from .inventories import (
    Inventory,
    default_categories,
    default_functions,
    default_tagset,
    load_inventory,
)
from .labeler import LabelerModel, LabelingResult, label_phrase, train_labeler
from .modelio import ModelIOError, load_model, save_model
from .projection import TraceEntry, TraceTable, to_phenogrammatical, undo_projection
from .query import Match, QueryError, parse_query, search
from .service import ServiceConfig, create_app, load_config
from .tagger import TagResult, TrigramModel, tag_pos, train_trigram, two_best, viterbi

__version__ = "0.1.0"

__all__ = [
    "AgreementMetrics",
    "ChunkError",
    "ChunkModel",
    "ExportDocument",
    "ExportError",
    "ExportParseError",
    "GraphError",
    "Inconsistency",
    "InconsistencyKind",
    "Inventory",
    "LabelerModel",
    "LabelingResult",
    "Match",
    "ModelIOError",
    "QueryError",
    "RelTag",
    "ServiceConfig",
    "SyntaxGraph",
    "TagResult",
    "Token",
    "TraceEntry",
    "TraceTable",
    "TrigramModel",
    "Violation",
    "agreement_metrics",
    "build_increment",
    "create_app",
    "decode_relative",
    "default_categories",
    "default_functions",
    "default_tagset",
    "encode_relative",
    "find_inconsistencies",
    "label_phrase",
    "load_config",
    "load_inventory",
    "load_model",
    "next_node_id",
    "parse_export",
    "parse_query",
    "save_model",
    "search",
    "serialize_export",
    "structure_chunk",
    "tag_pos",
    "to_phenogrammatical",
    "train_chunk",
    "train_labeler",
    "train_trigram",
    "two_best",
    "undo_projection",
    "validate",
    "viterbi",
]
