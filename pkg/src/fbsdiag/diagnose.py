"""Rank failure-cause candidates for a described symptom.

The query text is embedded in the same space as the chunk index; the
best-scoring chunks each contribute their causal tail (everything below
the anchor for proposed chunks, everything below the record's observed
effects for baseline chunks), and candidates inherit the score of the
chunk they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from fbsdiag.chunking import METHOD_BASELINE, METHOD_PROPOSED, METHODS, Chunk, cause_depths
from fbsdiag.embedding import VectorIndex, top_k
from fbsdiag.errors import DiagnosisError, UnknownNodeError
from fbsdiag.ontology import EdgeKind, KnowledgeGraph, Level

__all__ = [
    "CauseCandidate",
    "DEFAULT_K",
    "DiagnosisQuery",
    "SCORING_CHUNK",
    "SCORING_DEPTH_DISCOUNTED",
    "extract_causes_from_chunk",
    "infer_causes",
    "ranked_labels",
]

DEFAULT_K = 10
SCORING_CHUNK = "chunk"
SCORING_DEPTH_DISCOUNTED = "depth_discounted"
DEPTH_DISCOUNT = 0.9


@dataclass(frozen=True)
class DiagnosisQuery:
    """What happened, where to look, and how many candidates to return.

    ``level`` selects the chunking level and is required for the proposed
    method. ``attach_hint`` optionally narrows proposed retrieval to
    chunks anchored inside one system subtree.
    """

    description: str
    method: str
    n: int
    level: Level | None = None
    attach_hint: str | None = None

    def check(self) -> None:
        if not self.description.strip():
            raise DiagnosisError("query description is empty", code="empty-query")
        if self.method not in METHODS:
            raise DiagnosisError(
                f"unknown method {self.method!r}; expected one of {METHODS}",
                code="unknown-method",
            )
        if self.n < 1:
            raise DiagnosisError("n must be at least 1", code="bad-n")
        if self.method == METHOD_PROPOSED and self.level is None:
            raise DiagnosisError(
                "the proposed method requires a hierarchy level", code="level-required"
            )


@dataclass(frozen=True)
class CauseCandidate:
    label: str
    failure_id: str
    score: float
    provenance: tuple[str, ...]


def _chunk_roots(chunk: Chunk, graph: KnowledgeGraph) -> list[str]:
    """Members no other member points at; the observed effects."""
    members = set(chunk.member_failure_ids)
    caused = {
        edge.dst
        for edge in graph.edges
        if edge.kind is EdgeKind.HAS_CAUSE and edge.src in members and edge.dst in members
    }
    return sorted(members - caused)


def _candidate_depths(chunk: Chunk, graph: KnowledgeGraph) -> list[tuple[str, int]]:
    members = set(chunk.member_failure_ids)
    if chunk.method == METHOD_PROPOSED:
        if chunk.anchor_failure_id is None:
            raise DiagnosisError("proposed chunk lacks an anchor", code="bad-chunk")
        roots = [chunk.anchor_failure_id]
    else:
        roots = _chunk_roots(chunk, graph)
    depths = cause_depths(graph, roots, members)
    root_set = set(roots)
    ordered = sorted(
        ((fid, depth) for fid, depth in depths.items() if fid not in root_set),
        key=lambda item: (item[1], item[0]),
    )
    return ordered


def extract_causes_from_chunk(chunk: Chunk, graph: KnowledgeGraph) -> list[str]:
    """Candidate failure ids of one chunk, nearest causes first.

    Proposed chunks yield the anchor's causal closure without the anchor;
    baseline chunks yield every member that is not an observed effect.
    A single-failure chunk therefore yields nothing.
    """
    return [fid for fid, _ in _candidate_depths(chunk, graph)]


def _subtree_system_ids(graph: KnowledgeGraph, root: str) -> set[str]:
    if root not in graph.system_nodes:
        raise UnknownNodeError(root)
    children: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.HAS_PART:
            children.setdefault(edge.src, []).append(edge.dst)
    out: set[str] = set()
    frontier = [root]
    while frontier:
        current = frontier.pop()
        if current in out:
            continue
        out.add(current)
        frontier.extend(children.get(current, ()))
    return out


def infer_causes(
    graph: KnowledgeGraph,
    index: VectorIndex,
    query: DiagnosisQuery,
    *,
    k: int = DEFAULT_K,
    dedup: bool = False,
    scoring: str = SCORING_CHUNK,
) -> list[CauseCandidate]:
    """Ranked cause candidates for a query, at most ``query.n`` of them.

    Candidates arrive in retrieval order: best chunk first, and inside a
    chunk nearest causes first. With ``dedup`` off, the same label can
    appear once per contributing chunk; with it on, later repeats merge
    into the first occurrence's provenance.
    """
    query.check()
    if index.chunks is None:
        raise DiagnosisError(
            "index has no chunks bound; call bind_chunks after loading",
            code="unbound-index",
        )
    if not index.chunks:
        raise DiagnosisError("index is empty; nothing to retrieve", code="empty-index")
    if scoring not in (SCORING_CHUNK, SCORING_DEPTH_DISCOUNTED):
        raise DiagnosisError(f"unknown scoring mode {scoring!r}", code="unknown-scoring")

    for chunk in index.chunks:
        if chunk.method != query.method:
            raise DiagnosisError(
                f"index holds {chunk.method!r} chunks but the query asks for {query.method!r}",
                code="method-mismatch",
            )
        if query.method == METHOD_PROPOSED and chunk.level is not query.level:
            raise DiagnosisError(
                "index was chunked at a different level than the query",
                code="level-mismatch",
            )

    allowed_ids: set[str] | None = None
    if query.attach_hint is not None and query.method == METHOD_PROPOSED:
        subtree = _subtree_system_ids(graph, query.attach_hint)
        allowed_ids = set()
        for chunk in index.chunks:
            anchor = chunk.anchor_failure_id
            if anchor is not None and graph.attachment_of(anchor) in subtree:
                allowed_ids.add(chunk.chunk_id)

    query_vector = index.provider.embed([query.description])[0]
    retrieved = top_k(index, query_vector, k, allowed_ids=allowed_ids)
    chunks_by_id = {chunk.chunk_id: chunk for chunk in index.chunks}

    candidates: list[CauseCandidate] = []
    seen_labels: dict[str, int] = {}
    for chunk_id, score in retrieved:
        chunk = chunks_by_id[chunk_id]
        for fid, depth in _candidate_depths(chunk, graph):
            node = graph.failure_node(fid)
            value = score
            if scoring == SCORING_DEPTH_DISCOUNTED:
                value = score * (DEPTH_DISCOUNT**depth)
            if dedup:
                key = " ".join(node.label.casefold().split())
                if key in seen_labels:
                    slot = seen_labels[key]
                    previous = candidates[slot]
                    if chunk_id not in previous.provenance:
                        candidates[slot] = replace(
                            previous, provenance=previous.provenance + (chunk_id,)
                        )
                    continue
                seen_labels[key] = len(candidates)
            candidates.append(
                CauseCandidate(
                    label=node.label,
                    failure_id=fid,
                    score=value,
                    provenance=(chunk_id,),
                )
            )

    # Retrieval already yields descending chunk scores; a stable sort
    # keeps that order and only reorders under depth-discounted scoring.
    candidates.sort(key=lambda candidate: -candidate.score)
    return candidates[: query.n]


def ranked_labels(candidates: Sequence[CauseCandidate]) -> list[str]:
    return [candidate.label for candidate in candidates]
