"""Access to the example dataset and vocab tables shipped in ``data/``."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import yaml

from fbsdiag.errors import ParseError
from fbsdiag.ingest import (
    ModelSpec,
    RecordSpec,
    add_maintenance_record,
    build_fbs_model,
    parse_model_spec,
    parse_record_corpus,
)
from fbsdiag.evaluation import EvalSuite, parse_suite
from fbsdiag.ontology import KnowledgeGraph

__all__ = [
    "data_path",
    "example_graph_path",
    "example_line",
    "example_model_spec",
    "example_records",
    "example_suite",
    "synonym_table",
]

_DATA_DIR = Path(__file__).resolve().parent / "data"

MODEL_FILE = "example_line_model.yaml"
RECORDS_FILE = "example_line_records.yaml"
GRAPH_FILE = "example_line.dkg"
SUITE_FILE = "example_suite.yaml"
SYNONYMS_FILE = "synonyms.yaml"


def data_path(name: str) -> Path:
    path = _DATA_DIR / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled data file {name!r} under {_DATA_DIR}")
    return path


def _load_yaml(name: str) -> Any:
    path = data_path(name)
    try:
        return yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:  # pragma: no cover - bundled files are generated
        raise ParseError(f"{path}: not valid YAML: {exc}") from exc


def example_model_spec() -> ModelSpec:
    return parse_model_spec(_load_yaml(MODEL_FILE))


def example_records() -> list[RecordSpec]:
    return parse_record_corpus(_load_yaml(RECORDS_FILE))


def example_graph_path() -> Path:
    return data_path(GRAPH_FILE)


def example_suite() -> EvalSuite:
    return parse_suite(_load_yaml(SUITE_FILE))


def synonym_table() -> dict[str, str]:
    doc = _load_yaml(SYNONYMS_FILE)
    if not isinstance(doc, dict) or "synonyms" not in doc:
        raise ParseError(f"{SYNONYMS_FILE}: expected a mapping with 'synonyms'")
    return {str(source): str(target) for source, target in doc["synonyms"].items()}


def example_line(*, with_records: bool = True) -> KnowledgeGraph:
    """The bundled line model, optionally with its record corpus replayed."""
    graph = build_fbs_model(example_model_spec())
    if with_records:
        for record in example_records():
            add_maintenance_record(graph, record)
    return graph
