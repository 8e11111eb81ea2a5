"""Disk round-tripping of knowledge graphs, plus interchange exports.

The on-disk form (conventional extension ``.dkg``) is one YAML document
with nodes sorted by id and edges sorted by (kind, src, dst), so that
serializing the same graph always yields the same bytes.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping

import yaml

from fbsdiag.errors import DomainError, ParseError, UnvalidatedGraphError
from fbsdiag.ontology import (
    Edge,
    EdgeKind,
    FailureNode,
    KnowledgeGraph,
    SystemNode,
    parse_level,
)

__all__ = [
    "FORMAT_VERSION",
    "GRAPH_EXTENSION",
    "LoadValidationError",
    "document_to_graph",
    "export_graph_script",
    "export_property_graph",
    "graph_to_document",
    "load_graph",
    "save_graph",
    "serialize_graph",
]

FORMAT_VERSION = "1"
GRAPH_EXTENSION = ".dkg"


class LoadValidationError(DomainError):
    """A loaded document parsed fine but failed structural validation."""

    def __init__(self, message: str) -> None:
        super().__init__(message, code="validation-error")


def graph_to_document(graph: KnowledgeGraph) -> dict[str, Any]:
    """Canonical dict form of a graph; a pure function of its content."""
    return {
        "format_version": FORMAT_VERSION,
        "metadata": {"created": graph.created, "source": graph.source},
        "system_nodes": [
            {
                "id": node.id,
                "label": node.label,
                "level": node.level.value,
                "description": node.description,
            }
            for node in sorted(graph.system_nodes.values(), key=lambda n: n.id)
        ],
        "failure_nodes": [
            {
                "id": node.id,
                "label": node.label,
                "category": node.category,
                "record_id": node.record_id,
                "description": node.description,
            }
            for node in sorted(graph.failure_nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {"kind": edge.kind.value, "src": edge.src, "dst": edge.dst}
            for edge in sorted(graph.edges, key=Edge.sort_key)
        ],
    }


def serialize_graph(graph: KnowledgeGraph) -> str:
    return yaml.safe_dump(
        graph_to_document(graph),
        sort_keys=True,
        allow_unicode=True,
        default_flow_style=False,
        width=2**16,
    )


def _as_str(value: Any, where: str) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float, bool)):
        return str(value)
    raise ParseError(f"{where}: expected a string, got {type(value).__name__}")


def _req(mapping: Mapping[str, Any], key: str, where: str) -> Any:
    if not isinstance(mapping, Mapping):
        raise ParseError(f"{where}: expected a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        raise ParseError(f"{where}: missing field {key!r}")
    return mapping[key]


def document_to_graph(doc: Mapping[str, Any]) -> KnowledgeGraph:
    """Rebuild a graph from its document form and validate it.

    Raises ParseError on shape problems and LoadValidationError when the
    content breaks a structural invariant (hand-edited files, mostly).
    """
    if not isinstance(doc, Mapping):
        raise ParseError(f"document root: expected a mapping, got {type(doc).__name__}")
    version = _as_str(doc.get("format_version"), "format_version")
    if version != FORMAT_VERSION:
        raise ParseError(
            f"unsupported format_version {version!r}; this build reads {FORMAT_VERSION!r}"
        )

    graph = KnowledgeGraph()
    metadata = doc.get("metadata") or {}
    if not isinstance(metadata, Mapping):
        raise ParseError("metadata: expected a mapping")
    graph.created = _as_str(metadata.get("created"), "metadata.created")
    graph.source = _as_str(metadata.get("source"), "metadata.source")

    try:
        for index, raw in enumerate(doc.get("system_nodes") or []):
            where = f"system_nodes[{index}]"
            graph.add_system_node(
                SystemNode(
                    id=_as_str(_req(raw, "id", where), f"{where}.id"),
                    label=_as_str(_req(raw, "label", where), f"{where}.label"),
                    level=parse_level(_as_str(_req(raw, "level", where), f"{where}.level")),
                    description=_as_str(raw.get("description"), f"{where}.description"),
                )
            )
        for index, raw in enumerate(doc.get("failure_nodes") or []):
            where = f"failure_nodes[{index}]"
            graph.add_failure_node(
                FailureNode(
                    id=_as_str(_req(raw, "id", where), f"{where}.id"),
                    label=_as_str(_req(raw, "label", where), f"{where}.label"),
                    category=_as_str(_req(raw, "category", where), f"{where}.category"),
                    record_id=_as_str(raw.get("record_id"), f"{where}.record_id"),
                    description=_as_str(raw.get("description"), f"{where}.description"),
                )
            )
        for index, raw in enumerate(doc.get("edges") or []):
            where = f"edges[{index}]"
            kind_name = _as_str(_req(raw, "kind", where), f"{where}.kind")
            try:
                kind = EdgeKind(kind_name)
            except ValueError:
                raise ParseError(f"{where}: unknown edge kind {kind_name!r}") from None
            graph.add_edge(
                Edge(
                    kind=kind,
                    src=_as_str(_req(raw, "src", where), f"{where}.src"),
                    dst=_as_str(_req(raw, "dst", where), f"{where}.dst"),
                )
            )
    except ParseError:
        raise
    except DomainError as exc:
        raise LoadValidationError(str(exc)) from exc

    report = graph.validate()
    if not report.ok:
        raise LoadValidationError(f"document is structurally invalid: {report.summary()}")
    return graph


def save_graph(graph: KnowledgeGraph, path: str | os.PathLike[str]) -> None:
    """Write a validated graph atomically (temp file, then rename)."""
    if not graph.validated:
        raise UnvalidatedGraphError("refusing to save a graph that has not passed validation")
    target = Path(path)
    text = serialize_graph(graph)
    handle = tempfile.NamedTemporaryFile(
        "w",
        encoding="utf-8",
        newline="\n",
        dir=target.parent or Path("."),
        prefix=target.name + ".",
        suffix=".tmp",
        delete=False,
    )
    try:
        with handle:
            handle.write(text)
        # NamedTemporaryFile creates mode 600; give the result normal perms.
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(handle.name, 0o666 & ~umask)
        os.replace(handle.name, target)
    except BaseException:
        try:
            os.unlink(handle.name)
        except OSError:
            pass
        raise


def load_graph(path: str | os.PathLike[str]) -> KnowledgeGraph:
    """Read a graph document; the result has passed validation."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        location = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"{path}: not valid YAML{location}: {exc}") from exc
    return document_to_graph(doc)


# -- interchange exports ---------------------------------------------------


def export_property_graph(graph: KnowledgeGraph, out_dir: str | os.PathLike[str]) -> tuple[Path, Path]:
    """Write nodes.csv and relationships.csv for bulk property-graph import.

    One row per node / edge, sorted, so row counts match the graph exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    nodes_path = out / "nodes.csv"
    rels_path = out / "relationships.csv"

    with nodes_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["id", "label", "kind", "level", "category", "description"])
        rows = [
            (n.id, n.label, "System", n.level.value, "", n.description)
            for n in graph.system_nodes.values()
        ] + [
            (n.id, n.label, "Failure", "", n.category, n.description)
            for n in graph.failure_nodes.values()
        ]
        for row in sorted(rows, key=lambda r: r[0]):
            writer.writerow(row)

    with rels_path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["src", "dst", "kind"])
        for edge in sorted(graph.edges, key=Edge.sort_key):
            writer.writerow([edge.src, edge.dst, edge.kind.name])

    return nodes_path, rels_path


def _quote(value: str) -> str:
    return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"


def export_graph_script(graph: KnowledgeGraph, path: str | os.PathLike[str]) -> Path:
    """Write one CREATE/MATCH statement per line in Cypher syntax.

    Statement order is deterministic: system nodes, failure nodes, then
    edges, each sorted the same way as the disk format.
    """
    lines: list[str] = []
    for node in sorted(graph.system_nodes.values(), key=lambda n: n.id):
        lines.append(
            "CREATE (:System {id: %s, label: %s, level: %s, description: %s});"
            % (
                _quote(node.id),
                _quote(node.label),
                _quote(node.level.value),
                _quote(node.description),
            )
        )
    for node in sorted(graph.failure_nodes.values(), key=lambda n: n.id):
        lines.append(
            "CREATE (:Failure {id: %s, label: %s, category: %s, record_id: %s, description: %s});"
            % (
                _quote(node.id),
                _quote(node.label),
                _quote(node.category),
                _quote(node.record_id),
                _quote(node.description),
            )
        )
    for edge in sorted(graph.edges, key=Edge.sort_key):
        lines.append(
            "MATCH (a {id: %s}), (b {id: %s}) CREATE (a)-[:%s]->(b);"
            % (_quote(edge.src), _quote(edge.dst), edge.kind.name)
        )
    target = Path(path)
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return target
