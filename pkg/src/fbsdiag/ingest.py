"""Build system models and replay maintenance records onto a graph.

A model spec is a tree of labeled entries, one per system node; each
entry's children sit exactly one level below it. A record spec carries
the failures observed during one maintenance event, where each failure
attaches to a system node, plus cause pairs between them.

Node ids are either given explicitly or derived from the label path,
e.g. ``lego-car-line/roof-assembly/chuck-the-roof``. Failure ids are
``<record_id>:<key>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from fbsdiag.errors import (
    DomainError,
    ParseError,
    SpecError,
    UnknownNodeError,
    UnvalidatedGraphError,
)
from fbsdiag.ontology import (
    Edge,
    EdgeKind,
    FailureNode,
    KnowledgeGraph,
    Level,
    SystemNode,
    parse_level,
)

__all__ = [
    "CausePair",
    "FailureEntry",
    "ModelEntry",
    "ModelSpec",
    "RecordSpec",
    "RecordSummary",
    "add_maintenance_record",
    "build_fbs_model",
    "corpus_to_document",
    "failure_id_for",
    "list_records",
    "model_spec_to_document",
    "parse_model_spec",
    "parse_record_corpus",
    "parse_record_spec",
    "record_spec_to_document",
]


# -- model specs -----------------------------------------------------------


@dataclass
class ModelEntry:
    """One node of the model tree. ``level=None`` means one below the parent."""

    label: str
    level: Level | None = None
    description: str = ""
    id: str | None = None
    children: list["ModelEntry"] = field(default_factory=list)
    sequences: list[list[str]] = field(default_factory=list)


@dataclass
class ModelSpec:
    roots: list[ModelEntry]
    source: str = ""


def _slug(text: str) -> str:
    out = []
    last_dash = True
    for ch in text.lower():
        if ch.isalnum():
            out.append(ch)
            last_dash = False
        elif not last_dash:
            out.append("-")
            last_dash = True
    return "".join(out).strip("-") or "node"


def _parse_entry(raw: Any, where: str) -> ModelEntry:
    if not isinstance(raw, Mapping):
        raise ParseError(f"{where}: expected a mapping, got {type(raw).__name__}")
    if "label" not in raw:
        raise ParseError(f"{where}: missing field 'label'")
    label = str(raw["label"])
    level = parse_level(str(raw["level"])) if raw.get("level") is not None else None
    children_raw = raw.get("children") or []
    if not isinstance(children_raw, list):
        raise ParseError(f"{where}.children: expected a list")
    children = [
        _parse_entry(child, f"{where}.children[{i}]") for i, child in enumerate(children_raw)
    ]
    sequences_raw = raw.get("sequences") or []
    if not isinstance(sequences_raw, list):
        raise ParseError(f"{where}.sequences: expected a list of lists")
    sequences: list[list[str]] = []
    for i, seq in enumerate(sequences_raw):
        if not isinstance(seq, list):
            raise ParseError(f"{where}.sequences[{i}]: expected a list")
        sequences.append([str(member) for member in seq])
    return ModelEntry(
        label=label,
        level=level,
        description=str(raw.get("description") or ""),
        id=str(raw["id"]) if raw.get("id") is not None else None,
        children=children,
        sequences=sequences,
    )


def parse_model_spec(data: Any) -> ModelSpec:
    """Accepts ``{"model": {...}}`` for one root or ``{"roots": [...]}``."""
    if not isinstance(data, Mapping):
        raise ParseError(f"model spec: expected a mapping, got {type(data).__name__}")
    if "model" in data:
        roots = [_parse_entry(data["model"], "model")]
    elif "roots" in data:
        raw_roots = data["roots"]
        if not isinstance(raw_roots, list) or not raw_roots:
            raise ParseError("roots: expected a non-empty list")
        roots = [_parse_entry(raw, f"roots[{i}]") for i, raw in enumerate(raw_roots)]
    else:
        raise ParseError("model spec: expected a 'model' or 'roots' field")
    return ModelSpec(roots=roots, source=str(data.get("source") or ""))


def build_fbs_model(spec: ModelSpec) -> KnowledgeGraph:
    """Expand a model spec into a validated graph of system nodes.

    Checks level adjacency, sibling-label uniqueness and sequence member
    resolution before returning; the result has passed validation.
    """
    graph = KnowledgeGraph()
    graph.source = spec.source

    def walk(entry: ModelEntry, parent: SystemNode | None, where: str) -> None:
        if parent is None:
            level = entry.level or Level.LINE_FUNCTION
            if level is not Level.LINE_FUNCTION:
                raise SpecError(
                    f"{where}: root entries must be {Level.LINE_FUNCTION.value}, got {level.value}",
                    code="level-adjacency",
                )
        else:
            if parent.level is Level.STRUCTURE:
                raise SpecError(
                    f"{where}: {parent.label!r} is a {Level.STRUCTURE.value} and admits no parts",
                    code="level-adjacency",
                )
            expected_rank = parent.level.rank + 1
            level = entry.level or list(Level)[expected_rank]
            if level.rank != expected_rank:
                raise SpecError(
                    f"{where}: level {level.value} does not sit directly below {parent.level.value}",
                    code="level-adjacency",
                )

        node_id = entry.id or (
            _slug(entry.label) if parent is None else f"{parent.id}/{_slug(entry.label)}"
        )
        node = SystemNode(id=node_id, label=entry.label, level=level, description=entry.description)
        graph.add_system_node(node)
        if parent is not None:
            graph.add_edge(Edge(EdgeKind.HAS_PART, parent.id, node.id))

        seen_labels: set[str] = set()
        child_ids: dict[str, str] = {}
        for index, child in enumerate(entry.children):
            if child.label in seen_labels:
                raise SpecError(
                    f"{where}.children[{index}]: duplicate sibling label {child.label!r}",
                    code="duplicate-sibling-label",
                )
            seen_labels.add(child.label)
            walk(child, node, f"{where}.children[{index}]")
            child_ids[child.label] = child.id or f"{node.id}/{_slug(child.label)}"

        for seq_index, members in enumerate(entry.sequences):
            resolved: list[str] = []
            for member in members:
                if member not in child_ids:
                    raise SpecError(
                        f"{where}.sequences[{seq_index}]: {member!r} names no child of {entry.label!r}",
                        code="unknown-sequence-member",
                    )
                resolved.append(child_ids[member])
            # src is the later step of each consecutive pair
            for earlier, later in zip(resolved, resolved[1:]):
                graph.add_edge(Edge(EdgeKind.STEP_AFTER, later, earlier))

    for index, root in enumerate(spec.roots):
        walk(root, None, f"roots[{index}]")

    report = graph.validate()
    if not report.ok:
        raise SpecError(
            f"model spec produced an invalid graph: {report.summary()}",
            code="invalid-model",
        )
    return graph


# -- record specs ----------------------------------------------------------


@dataclass
class FailureEntry:
    key: str
    label: str
    category: str
    attach: str
    description: str = ""


@dataclass
class CausePair:
    """``cause`` names a key of this record; ``cause_existing`` a graph id."""

    effect: str
    cause: str | None = None
    cause_existing: str | None = None


@dataclass
class RecordSpec:
    record_id: str
    failures: list[FailureEntry] = field(default_factory=list)
    causes: list[CausePair] = field(default_factory=list)
    author: str = ""
    date: str = ""


def failure_id_for(record_id: str, key: str) -> str:
    return f"{record_id}:{key}"


def parse_record_spec(data: Any) -> RecordSpec:
    if not isinstance(data, Mapping):
        raise ParseError(f"record spec: expected a mapping, got {type(data).__name__}")
    if "record_id" not in data:
        raise ParseError("record spec: missing field 'record_id'")
    failures_raw = data.get("failures") or []
    if not isinstance(failures_raw, list):
        raise ParseError("failures: expected a list")
    failures: list[FailureEntry] = []
    for index, raw in enumerate(failures_raw):
        where = f"failures[{index}]"
        if not isinstance(raw, Mapping):
            raise ParseError(f"{where}: expected a mapping")
        for needed in ("key", "label", "category", "attach"):
            if needed not in raw:
                raise ParseError(f"{where}: missing field {needed!r}")
        failures.append(
            FailureEntry(
                key=str(raw["key"]),
                label=str(raw["label"]),
                category=str(raw["category"]),
                attach=str(raw["attach"]),
                description=str(raw.get("description") or ""),
            )
        )
    causes_raw = data.get("causes") or []
    if not isinstance(causes_raw, list):
        raise ParseError("causes: expected a list")
    causes: list[CausePair] = []
    for index, raw in enumerate(causes_raw):
        where = f"causes[{index}]"
        if not isinstance(raw, Mapping):
            raise ParseError(f"{where}: expected a mapping")
        if "effect" not in raw:
            raise ParseError(f"{where}: missing field 'effect'")
        cause = raw.get("cause")
        cause_existing = raw.get("cause_existing")
        if (cause is None) == (cause_existing is None):
            raise ParseError(f"{where}: exactly one of 'cause' or 'cause_existing' is required")
        causes.append(
            CausePair(
                effect=str(raw["effect"]),
                cause=None if cause is None else str(cause),
                cause_existing=None if cause_existing is None else str(cause_existing),
            )
        )
    return RecordSpec(
        record_id=str(data["record_id"]),
        failures=failures,
        causes=causes,
        author=str(data.get("author") or ""),
        date=str(data.get("date") or ""),
    )


def parse_record_corpus(data: Any) -> list[RecordSpec]:
    """Accepts ``{"records": [...]}`` or a single record mapping."""
    if isinstance(data, Mapping) and "records" in data:
        raw = data["records"]
        if not isinstance(raw, list):
            raise ParseError("records: expected a list")
        return [parse_record_spec(item) for item in raw]
    return [parse_record_spec(data)]


def _check_record(graph: KnowledgeGraph, rec: RecordSpec) -> None:
    if not rec.record_id:
        raise SpecError("record_id must be non-empty", code="empty-record-id")
    keys: set[str] = set()
    for entry in rec.failures:
        if not entry.key:
            raise SpecError(f"record {rec.record_id!r}: empty failure key", code="empty-key")
        if entry.key in keys:
            raise SpecError(
                f"record {rec.record_id!r}: duplicate failure key {entry.key!r}",
                code="duplicate-key",
            )
        keys.add(entry.key)
        if entry.attach not in graph.system_nodes:
            raise SpecError(
                f"record {rec.record_id!r}: unknown attach id {entry.attach!r}",
                code="unknown-attach",
            )
        fid = failure_id_for(rec.record_id, entry.key)
        if fid in graph:
            raise SpecError(
                f"record {rec.record_id!r}: failure id {fid!r} already exists in the graph",
                code="duplicate-failure-id",
            )
    local_edges: list[tuple[str, str]] = []
    for pair in rec.causes:
        if pair.effect not in keys:
            raise SpecError(
                f"record {rec.record_id!r}: cause pair names undeclared key {pair.effect!r}",
                code="undeclared-key",
            )
        if pair.cause is not None:
            if pair.cause not in keys:
                raise SpecError(
                    f"record {rec.record_id!r}: cause pair names undeclared key {pair.cause!r}",
                    code="undeclared-key",
                )
            local_edges.append((pair.effect, pair.cause))
        else:
            assert pair.cause_existing is not None
            if pair.cause_existing not in graph.failure_nodes:
                raise UnknownNodeError(
                    pair.cause_existing,
                    message=(
                        f"record {rec.record_id!r}: cause_existing {pair.cause_existing!r}"
                        " is not a failure node in the graph"
                    ),
                )
    cycle = _find_cycle(keys, local_edges)
    if cycle is not None:
        listed = " -> ".join(cycle + [cycle[0]])
        raise SpecError(
            f"record {rec.record_id!r}: cause pairs form a cycle: {listed}",
            code="record-cause-cycle",
        )


def _find_cycle(nodes: Iterable[str], edges: list[tuple[str, str]]) -> list[str] | None:
    adjacency: dict[str, list[str]] = {node: [] for node in nodes}
    for src, dst in edges:
        adjacency[src].append(dst)
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in adjacency}
    trail: list[str] = []

    def visit(node: str) -> list[str] | None:
        color[node] = GRAY
        trail.append(node)
        for nxt in adjacency[node]:
            if color[nxt] == GRAY:
                return trail[trail.index(nxt):]
            if color[nxt] == WHITE:
                found = visit(nxt)
                if found is not None:
                    return found
        color[node] = BLACK
        trail.pop()
        return None

    for node in sorted(adjacency):
        if color[node] == WHITE:
            found = visit(node)
            if found is not None:
                return found
    return None


def add_maintenance_record(graph: KnowledgeGraph, rec: RecordSpec) -> str:
    """Apply one record to a validated graph, atomically.

    Any rejection (bad attach id, undeclared key, a causal cycle within the
    record or across records) leaves the graph exactly as it was. On
    success the graph has been re-validated.
    """
    if not graph.validated:
        raise UnvalidatedGraphError("add_maintenance_record requires a validated graph")
    _check_record(graph, rec)

    added_nodes: list[str] = []
    added_edges: list[Edge] = []

    def undo() -> None:
        for edge in added_edges:
            graph._discard_edge(edge)
        for node_id in added_nodes:
            graph.failure_nodes.pop(node_id, None)
        graph.validated = True

    try:
        for entry in rec.failures:
            fid = failure_id_for(rec.record_id, entry.key)
            graph.add_failure_node(
                FailureNode(
                    id=fid,
                    label=entry.label,
                    category=entry.category,
                    record_id=rec.record_id,
                    description=entry.description,
                )
            )
            added_nodes.append(fid)
        for entry in rec.failures:
            edge = Edge(
                EdgeKind.HAS_FAILURE, entry.attach, failure_id_for(rec.record_id, entry.key)
            )
            graph.add_edge(edge)
            added_edges.append(edge)
        for pair in rec.causes:
            effect_id = failure_id_for(rec.record_id, pair.effect)
            cause_id = (
                pair.cause_existing
                if pair.cause_existing is not None
                else failure_id_for(rec.record_id, pair.cause or "")
            )
            edge = Edge(EdgeKind.HAS_CAUSE, effect_id, cause_id)
            graph.add_edge(edge)
            added_edges.append(edge)
    except DomainError:
        undo()
        raise

    report = graph.validate()
    if not report.ok:
        undo()
        raise SpecError(
            f"record {rec.record_id!r} would leave the graph invalid: {report.summary()}",
            code="invalid-record",
        )
    return rec.record_id


# -- document forms --------------------------------------------------------


def _entry_to_document(entry: ModelEntry) -> dict[str, Any]:
    doc: dict[str, Any] = {"label": entry.label}
    if entry.id is not None:
        doc["id"] = entry.id
    if entry.level is not None:
        doc["level"] = entry.level.value
    if entry.description:
        doc["description"] = entry.description
    if entry.children:
        doc["children"] = [_entry_to_document(child) for child in entry.children]
    if entry.sequences:
        doc["sequences"] = [list(seq) for seq in entry.sequences]
    return doc


def model_spec_to_document(spec: ModelSpec) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if spec.source:
        doc["source"] = spec.source
    if len(spec.roots) == 1:
        doc["model"] = _entry_to_document(spec.roots[0])
    else:
        doc["roots"] = [_entry_to_document(root) for root in spec.roots]
    return doc


def record_spec_to_document(rec: RecordSpec) -> dict[str, Any]:
    doc: dict[str, Any] = {"record_id": rec.record_id}
    if rec.author:
        doc["author"] = rec.author
    if rec.date:
        doc["date"] = rec.date
    doc["failures"] = []
    for entry in rec.failures:
        failure_doc: dict[str, Any] = {
            "key": entry.key,
            "label": entry.label,
            "category": entry.category,
            "attach": entry.attach,
        }
        if entry.description:
            failure_doc["description"] = entry.description
        doc["failures"].append(failure_doc)
    doc["causes"] = [
        {"effect": pair.effect, "cause": pair.cause}
        if pair.cause is not None
        else {"effect": pair.effect, "cause_existing": pair.cause_existing}
        for pair in rec.causes
    ]
    return doc


def corpus_to_document(records: Iterable[RecordSpec]) -> dict[str, Any]:
    return {"records": [record_spec_to_document(rec) for rec in records]}


# -- summaries -------------------------------------------------------------


@dataclass(frozen=True)
class RecordSummary:
    record_id: str
    failure_count: int
    attach_levels: tuple[Level, ...]


def list_records(graph: KnowledgeGraph) -> list[RecordSummary]:
    """One row per record id, ordered by record id."""
    by_record: dict[str, list[str]] = {}
    for node in graph.failure_nodes.values():
        by_record.setdefault(node.record_id, []).append(node.id)
    summaries: list[RecordSummary] = []
    for record_id in sorted(by_record):
        failure_ids = by_record[record_id]
        levels: set[Level] = set()
        for fid in failure_ids:
            system_id = graph.attachment_of(fid)
            if system_id is not None:
                levels.add(graph.system_nodes[system_id].level)
        summaries.append(
            RecordSummary(
                record_id=record_id,
                failure_count=len(failure_ids),
                attach_levels=tuple(sorted(levels, key=lambda lvl: lvl.rank)),
            )
        )
    return summaries
