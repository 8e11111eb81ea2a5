"""Maintenance knowledge graphs over a function-behavior-structure model,
with chunked retrieval of likely failure causes and an ablation harness.

The public surface re-exported here is what applications are expected to
use; the submodules stay importable for anything more specialised.
"""

__version__ = "0.1.0"

from fbsdiag.chunking import (
    METHOD_BASELINE,
    METHOD_PROPOSED,
    METHODS,
    Chunk,
    generate_chunks,
    render_chunk,
)
from fbsdiag.diagnose import CauseCandidate, DiagnosisQuery, infer_causes, ranked_labels
from fbsdiag.embedding import (
    VectorIndex,
    build_index,
    load_index,
    make_provider,
    save_index,
    top_k,
)
from fbsdiag.errors import (
    DiagnosisError,
    DomainError,
    DuplicateNodeError,
    EmbeddingError,
    EvalError,
    ParseError,
    SpecError,
    UnknownNodeError,
    UnvalidatedGraphError,
)
from fbsdiag.evaluation import (
    EvalResult,
    EvalSuite,
    GroundTruth,
    SuiteQuery,
    parse_suite,
    precision_at_n,
    recall_at_n,
    run_ablation,
)
from fbsdiag.ingest import (
    ModelSpec,
    RecordSpec,
    add_maintenance_record,
    build_fbs_model,
    failure_id_for,
    list_records,
    parse_model_spec,
    parse_record_corpus,
    parse_record_spec,
)
from fbsdiag.ontology import (
    Edge,
    EdgeKind,
    FailureNode,
    KnowledgeGraph,
    Level,
    SystemNode,
    ValidationReport,
    Violation,
    parse_level,
    validate_graph,
)
from fbsdiag.store import load_graph, save_graph

__all__ = [
    "__version__",
    "METHOD_BASELINE",
    "METHOD_PROPOSED",
    "METHODS",
    "CauseCandidate",
    "Chunk",
    "DiagnosisError",
    "DiagnosisQuery",
    "DomainError",
    "DuplicateNodeError",
    "Edge",
    "EdgeKind",
    "EmbeddingError",
    "EvalError",
    "EvalResult",
    "EvalSuite",
    "FailureNode",
    "GroundTruth",
    "KnowledgeGraph",
    "Level",
    "ModelSpec",
    "ParseError",
    "RecordSpec",
    "SpecError",
    "SuiteQuery",
    "SystemNode",
    "UnknownNodeError",
    "UnvalidatedGraphError",
    "ValidationReport",
    "VectorIndex",
    "Violation",
    "add_maintenance_record",
    "build_fbs_model",
    "build_index",
    "failure_id_for",
    "generate_chunks",
    "infer_causes",
    "list_records",
    "load_graph",
    "load_index",
    "make_provider",
    "parse_level",
    "parse_model_spec",
    "parse_record_corpus",
    "parse_record_spec",
    "parse_suite",
    "precision_at_n",
    "ranked_labels",
    "recall_at_n",
    "render_chunk",
    "run_ablation",
    "save_graph",
    "save_index",
    "top_k",
    "validate_graph",
]
