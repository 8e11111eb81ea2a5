"""Turn a failure-annotated graph into retrieval chunks.

Two strategies:

* ``proposed``: one chunk per failure attached at a chosen hierarchy
  level. The chunk walks that anchor's causes transitively but keeps only
  failures attached at the anchor's level or deeper; a cause attached
  above the level cuts the walk, so anything reachable only through it
  stays out. System nodes attached to the kept failures ride along, which
  is what lets retrieval see plant context alongside failure wording.
* ``baseline``: one chunk per maintenance record, all of its failures in
  causal order, no system nodes at all.

Chunk text is a pure function of the member subgraph: feeding the same
members in any order renders identical bytes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable

from fbsdiag.errors import DomainError, UnvalidatedGraphError
from fbsdiag.ontology import Edge, EdgeKind, KnowledgeGraph, Level

__all__ = [
    "Chunk",
    "METHOD_BASELINE",
    "METHOD_PROPOSED",
    "METHODS",
    "cause_depths",
    "generate_chunks",
    "generate_chunks_baseline",
    "generate_chunks_proposed",
    "render_chunk",
]

METHOD_PROPOSED = "proposed"
METHOD_BASELINE = "baseline"
METHODS = (METHOD_PROPOSED, METHOD_BASELINE)


@dataclass(frozen=True)
class Chunk:
    """One retrieval unit. ``level`` and ``anchor_failure_id`` are None for baseline."""

    chunk_id: str
    method: str
    anchor_failure_id: str | None
    text: str
    member_failure_ids: tuple[str, ...]
    member_system_ids: tuple[str, ...]
    level: Level | None


def cause_depths(
    graph: KnowledgeGraph, roots: Iterable[str], allowed: set[str]
) -> dict[str, int]:
    """Breadth-first causal distance from ``roots``, confined to ``allowed``."""
    adjacency: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.HAS_CAUSE and edge.src in allowed and edge.dst in allowed:
            adjacency.setdefault(edge.src, []).append(edge.dst)
    depths = {root: 0 for root in roots if root in allowed}
    frontier = sorted(depths)
    depth = 0
    while frontier:
        depth += 1
        nxt: list[str] = []
        for node in frontier:
            for target in adjacency.get(node, ()):
                if target not in depths:
                    depths[target] = depth
                    nxt.append(target)
        frontier = sorted(set(nxt))
    return depths


def _attachment_map(graph: KnowledgeGraph) -> dict[str, str]:
    return {
        edge.dst: edge.src
        for edge in graph.edges
        if edge.kind is EdgeKind.HAS_FAILURE and edge.dst in graph.failure_nodes
    }


def generate_chunks_proposed(
    graph: KnowledgeGraph, level: Level, *, include_ancestor_path: bool = False
) -> list[Chunk]:
    """Level-anchored chunks, ordered by anchor id.

    ``include_ancestor_path`` additionally pulls in the HasPart ancestors
    of every member system, giving each chunk its full hierarchy context.
    """
    if not graph.validated:
        raise UnvalidatedGraphError("chunk generation requires a validated graph")
    attach = _attachment_map(graph)
    cause_adjacency: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.HAS_CAUSE:
            cause_adjacency.setdefault(edge.src, []).append(edge.dst)
    for targets in cause_adjacency.values():
        targets.sort()

    def attach_rank(fid: str) -> int:
        return graph.system_nodes[attach[fid]].level.rank

    floor = level.rank
    anchors = sorted(
        fid for fid, sid in attach.items() if graph.system_nodes[sid].level is level
    )
    chunks: list[Chunk] = []
    for anchor in anchors:
        # Walk causes breadth-first; an out-of-level failure is neither
        # kept nor walked through, so it shields everything behind it.
        depths: dict[str, int] = {anchor: 0}
        frontier = [anchor]
        while frontier:
            nxt: list[str] = []
            for fid in frontier:
                for cause in cause_adjacency.get(fid, ()):
                    if cause in depths or attach_rank(cause) < floor:
                        continue
                    depths[cause] = depths[fid] + 1
                    nxt.append(cause)
            frontier = sorted(set(nxt))
        failure_ids = sorted(depths, key=lambda fid: (depths[fid], fid))
        system_ids = {attach[fid] for fid in failure_ids}
        if include_ancestor_path:
            system_ids |= _ancestors(graph, system_ids)
        ordered_systems = sorted(
            system_ids, key=lambda sid: (graph.system_nodes[sid].level.rank, sid)
        )
        chunks.append(
            Chunk(
                chunk_id=f"proposed:{level.value}:{anchor}",
                method=METHOD_PROPOSED,
                anchor_failure_id=anchor,
                text=render_chunk(graph, failure_ids, ordered_systems, METHOD_PROPOSED),
                member_failure_ids=tuple(failure_ids),
                member_system_ids=tuple(ordered_systems),
                level=level,
            )
        )
    return chunks


def _ancestors(graph: KnowledgeGraph, system_ids: Iterable[str]) -> set[str]:
    parents: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.HAS_PART:
            parents.setdefault(edge.dst, []).append(edge.src)
    out: set[str] = set()
    frontier = list(system_ids)
    while frontier:
        current = frontier.pop()
        for parent in parents.get(current, ()):
            if parent not in out:
                out.add(parent)
                frontier.append(parent)
    return out


def generate_chunks_baseline(graph: KnowledgeGraph) -> list[Chunk]:
    """One chunk per record id, ordered by record id.

    Members follow the record's causal topological order (effects before
    causes, ties by id); every failure node lands in exactly one chunk.
    """
    if not graph.validated:
        raise UnvalidatedGraphError("chunk generation requires a validated graph")
    by_record: dict[str, list[str]] = {}
    for node in graph.failure_nodes.values():
        by_record.setdefault(node.record_id, []).append(node.id)

    chunks: list[Chunk] = []
    for record_id in sorted(by_record):
        members = set(by_record[record_id])
        order = _topological(graph, members)
        chunks.append(
            Chunk(
                chunk_id=f"baseline:{record_id}",
                method=METHOD_BASELINE,
                anchor_failure_id=None,
                text=render_chunk(graph, order, (), METHOD_BASELINE),
                member_failure_ids=tuple(order),
                member_system_ids=(),
                level=None,
            )
        )
    return chunks


def _topological(graph: KnowledgeGraph, members: set[str]) -> list[str]:
    """Lexicographic Kahn order over the causation edges inside ``members``."""
    indegree = {fid: 0 for fid in members}
    adjacency: dict[str, list[str]] = {fid: [] for fid in members}
    for edge in graph.edges:
        if edge.kind is EdgeKind.HAS_CAUSE and edge.src in members and edge.dst in members:
            adjacency[edge.src].append(edge.dst)
            indegree[edge.dst] += 1
    ready = [fid for fid, degree in indegree.items() if degree == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        fid = heapq.heappop(ready)
        order.append(fid)
        for nxt in sorted(adjacency[fid]):
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)
    if len(order) != len(members):  # pragma: no cover - blocked by validation
        raise DomainError("causal cycle inside a record", code="cause-cycle")
    return order


def generate_chunks(
    graph: KnowledgeGraph,
    method: str,
    level: Level | None = None,
    *,
    include_ancestor_path: bool = False,
) -> list[Chunk]:
    """Dispatch on method name; proposed requires a level."""
    if method == METHOD_PROPOSED:
        if level is None:
            raise DomainError(
                "the proposed method chunks at a hierarchy level; pass one",
                code="level-required",
            )
        return generate_chunks_proposed(
            graph, level, include_ancestor_path=include_ancestor_path
        )
    if method == METHOD_BASELINE:
        return generate_chunks_baseline(graph)
    raise DomainError(f"unknown chunking method {method!r}", code="unknown-method")


def render_chunk(
    graph: KnowledgeGraph,
    failure_ids: Iterable[str],
    system_ids: Iterable[str],
    method: str,
) -> str:
    """Render members to canonical text, independent of input order.

    Proposed chunks lead with one ``<Level>: <label>`` line per system
    node, then failure lines with their attachment point, then cause
    arrows. Baseline chunks carry only failure lines and cause arrows.
    """
    failures = sorted(set(failure_ids))
    systems = sorted(set(system_ids))
    if not failures:
        raise DomainError("a chunk needs at least one failure member", code="empty-member")
    if method not in METHODS:
        raise DomainError(f"unknown chunking method {method!r}", code="unknown-method")

    attach = _attachment_map(graph)
    lines: list[str] = []
    if method == METHOD_PROPOSED:
        nodes = [graph.system_node(sid) for sid in systems]
        for node in sorted(nodes, key=lambda n: (n.level.rank, n.id)):
            lines.append(f"{node.level.value}: {node.label}")
    for fid in failures:
        node = graph.failure_node(fid)
        line = f"FAILURE({node.category}) {node.label}"
        if node.description:
            line += f" - {node.description}"
        if method == METHOD_PROPOSED:
            system_id = attach.get(fid)
            if system_id is not None:
                line += f" [at: {graph.system_nodes[system_id].label}]"
        lines.append(line)
    member_set = set(failures)
    causal = sorted(
        (edge for edge in graph.edges
         if edge.kind is EdgeKind.HAS_CAUSE and edge.src in member_set and edge.dst in member_set),
        key=Edge.sort_key,
    )
    for edge in causal:
        effect = graph.failure_nodes[edge.src].label
        cause = graph.failure_nodes[edge.dst].label
        lines.append(f"CAUSAL: {effect} <- {cause}")
    return "\n".join(lines)
