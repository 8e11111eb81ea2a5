"""Typed knowledge graph of a manufacturing system and its failures.

System nodes live on a fixed five-level hierarchy (line function down to
structure); failure nodes are observations taken from maintenance records.
Four edge kinds connect them:

* ``HasPart``     system -> system, exactly one level down
* ``StepAfter``   system -> system, same level; src is the later step
* ``HasFailure``  system -> failure, the failure's attachment point
* ``HasCause``    failure -> failure, from an effect to its cause

Causation is stored in the effect-to-cause direction only. The reverse
view is computed by :meth:`KnowledgeGraph.effects_of`, never stored.

Structural violations are reported with stable codes:

==========================  ================================================
code                        meaning
==========================  ================================================
unknown-endpoint            edge endpoint id resolves to no node
level-not-adjacent          HasPart endpoints are not on adjacent levels
structure-decomposition     HasPart tries to decompose a Structure node
has-part-endpoint-type      HasPart endpoint is not a system node
cross-level-sequence        StepAfter endpoints sit on different levels
self-sequence               StepAfter from a node to itself
step-after-endpoint-type    StepAfter endpoint is not a system node
has-failure-endpoint-type   HasFailure endpoints have the wrong node types
multi-attachment            failure attached to more than one system
has-cause-endpoint-type     HasCause endpoint is not a failure node
self-cause                  HasCause from a node to itself
duplicate-edge              identical (kind, src, dst) already present
cause-cycle                 causation edges form a directed cycle
unattached-failure          failure with no HasFailure attachment
orphan-system               system unreachable from any line function
==========================  ================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from fbsdiag.errors import (
    DomainError,
    DuplicateNodeError,
    UnknownNodeError,
)

__all__ = [
    "DEFAULT_FAILURE_CATEGORIES",
    "Edge",
    "EdgeKind",
    "EdgeViolationError",
    "FailureNode",
    "KnowledgeGraph",
    "Level",
    "SystemNode",
    "ValidationReport",
    "Violation",
    "level_rank",
    "parse_level",
    "validate_graph",
]


class Level(Enum):
    """Hierarchy level of a system node, ordered top (0) to bottom (4)."""

    LINE_FUNCTION = "LineFunction"
    PROCESS_FUNCTION = "ProcessFunction"
    PROCESS_ELEMENT_FUNCTION = "ProcessElementFunction"
    BEHAVIOR = "Behavior"
    STRUCTURE = "Structure"

    @property
    def rank(self) -> int:
        return _RANKS[self]


_RANKS: dict[Level, int] = {level: index for index, level in enumerate(Level)}


def level_rank(level: Level) -> int:
    """Ordinal of a level: LineFunction is 0, Structure is 4."""
    return _RANKS[level]


def parse_level(name: str) -> Level:
    """Resolve a level by its wire name, e.g. ``"ProcessFunction"``."""
    try:
        return Level(name)
    except ValueError:
        expected = ", ".join(level.value for level in Level)
        raise DomainError(
            f"unknown level {name!r}; expected one of: {expected}",
            code="unknown-level",
        ) from None


class EdgeKind(Enum):
    HAS_PART = "HasPart"
    STEP_AFTER = "StepAfter"
    HAS_FAILURE = "HasFailure"
    HAS_CAUSE = "HasCause"


#: Conventional failure categories. The field is an open tag: any non-empty
#: string is accepted, these are merely the values used by the bundled data.
DEFAULT_FAILURE_CATEGORIES = ("motion", "mechanism_structure", "accuracy")


@dataclass(frozen=True)
class SystemNode:
    """A function, behavior or structure element of the modeled plant."""

    id: str
    label: str
    level: Level
    description: str = ""


@dataclass(frozen=True)
class FailureNode:
    """One failure observation, owned by the record that reported it."""

    id: str
    label: str
    category: str
    record_id: str
    description: str = ""


@dataclass(frozen=True)
class Edge:
    kind: EdgeKind
    src: str
    dst: str

    def sort_key(self) -> tuple[str, str, str]:
        return (self.kind.value, self.src, self.dst)


@dataclass(frozen=True)
class Violation:
    """One structural problem; ``subjects`` lists the node ids involved."""

    code: str
    message: str
    subjects: tuple[str, ...] = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [violation.code for violation in self.violations]

    def summary(self) -> str:
        if self.ok:
            return "0 violations"
        lines = [f"{len(self.violations)} violations"]
        for violation in self.violations:
            subjects = ", ".join(violation.subjects)
            lines.append(f"  [{violation.code}] {violation.message} ({subjects})")
        return "\n".join(lines)


class EdgeViolationError(DomainError):
    """An edge insertion was rejected; carries the concrete violation."""

    def __init__(self, violation: Violation) -> None:
        super().__init__(violation.message, code=violation.code)
        self.violation = violation


class KnowledgeGraph:
    """Mutable container for system nodes, failure nodes and typed edges.

    Node ids share one namespace. Mutation resets :attr:`validated`;
    :meth:`validate` re-derives it. ``created`` and ``source`` are free-form
    provenance strings round-tripped by the disk format.
    """

    def __init__(self) -> None:
        self.system_nodes: dict[str, SystemNode] = {}
        self.failure_nodes: dict[str, FailureNode] = {}
        self.edges: set[Edge] = set()
        self.validated = False
        self.created = ""
        self.source = ""
        # Adjacency indexes, kept in lockstep with ``edges`` so neighbor
        # lookups stay O(1); ``edges`` remains the authoritative set.
        self._out: dict[tuple[EdgeKind, str], set[str]] = {}
        self._in: dict[tuple[EdgeKind, str], set[str]] = {}

    def _index_edge(self, edge: Edge) -> None:
        self._out.setdefault((edge.kind, edge.src), set()).add(edge.dst)
        self._in.setdefault((edge.kind, edge.dst), set()).add(edge.src)

    def _discard_edge(self, edge: Edge) -> None:
        """Remove an edge and its index entries. No validation semantics;
        intended for rollback paths that restore a known-good state."""
        self.edges.discard(edge)
        for index, key, other in (
            (self._out, (edge.kind, edge.src), edge.dst),
            (self._in, (edge.kind, edge.dst), edge.src),
        ):
            bucket = index.get(key)
            if bucket is not None:
                bucket.discard(other)
                if not bucket:
                    del index[key]

    # -- basic access ------------------------------------------------------

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.system_nodes or node_id in self.failure_nodes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return (
            self.system_nodes == other.system_nodes
            and self.failure_nodes == other.failure_nodes
            and self.edges == other.edges
            and self.created == other.created
            and self.source == other.source
        )

    def copy(self) -> "KnowledgeGraph":
        dup = KnowledgeGraph()
        dup.system_nodes = dict(self.system_nodes)
        dup.failure_nodes = dict(self.failure_nodes)
        dup.edges = set(self.edges)
        dup.validated = self.validated
        dup.created = self.created
        dup.source = self.source
        dup._out = {key: set(value) for key, value in self._out.items()}
        dup._in = {key: set(value) for key, value in self._in.items()}
        return dup

    def system_node(self, node_id: str) -> SystemNode:
        try:
            return self.system_nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def failure_node(self, node_id: str) -> FailureNode:
        try:
            return self.failure_nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def node(self, node_id: str) -> SystemNode | FailureNode:
        node = self.system_nodes.get(node_id) or self.failure_nodes.get(node_id)
        if node is None:
            raise UnknownNodeError(node_id)
        return node

    def edges_of_kind(self, kind: EdgeKind) -> Iterator[Edge]:
        return (edge for edge in self.edges if edge.kind is kind)

    # -- mutation ----------------------------------------------------------

    def add_system_node(self, node: SystemNode) -> None:
        if node.id in self:
            raise DuplicateNodeError(node.id)
        if not node.id:
            raise DomainError("node id must be non-empty", code="empty-id")
        self.system_nodes[node.id] = node
        self.validated = False

    def add_failure_node(self, node: FailureNode) -> None:
        if node.id in self:
            raise DuplicateNodeError(node.id)
        if not node.id:
            raise DomainError("node id must be non-empty", code="empty-id")
        if not node.category:
            raise DomainError(
                f"failure node {node.id!r} has an empty category",
                code="empty-category",
            )
        self.failure_nodes[node.id] = node
        self.validated = False

    def add_edge(self, edge: Edge) -> None:
        """Insert an edge, rejecting any structural violation.

        Beyond the local kind rules this also refuses a HasCause edge that
        would close a directed causation cycle.
        """
        violation = self.validate_edge(edge)
        if violation is None and edge.kind is EdgeKind.HAS_CAUSE:
            path = self._cause_path(edge.dst, edge.src)
            if path is not None:
                cycle = " -> ".join(path + [path[0]])
                violation = Violation(
                    "cause-cycle",
                    f"edge would close a causal cycle: {cycle}",
                    tuple(path),
                )
        if violation is not None:
            raise EdgeViolationError(violation)
        self.edges.add(edge)
        self._index_edge(edge)
        self.validated = False

    # -- edge rules --------------------------------------------------------

    def validate_edge(self, edge: Edge) -> Violation | None:
        """Check the kind-local rules for one edge against this graph.

        Endpoints must resolve (UnknownNodeError otherwise). Causal
        acyclicity is a whole-graph property checked by :meth:`validate`
        and, incrementally, by :meth:`add_edge`.
        """
        if edge.src not in self:
            raise UnknownNodeError(edge.src)
        if edge.dst not in self:
            raise UnknownNodeError(edge.dst)
        if edge in self.edges:
            return Violation(
                "duplicate-edge",
                f"edge {edge.kind.value} {edge.src!r} -> {edge.dst!r} already present",
                (edge.src, edge.dst),
            )
        return self._kind_violation(edge)

    def _kind_violation(self, edge: Edge) -> Violation | None:
        src_sys = self.system_nodes.get(edge.src)
        dst_sys = self.system_nodes.get(edge.dst)
        subjects = (edge.src, edge.dst)

        if edge.kind is EdgeKind.HAS_PART:
            if src_sys is None or dst_sys is None:
                return Violation(
                    "has-part-endpoint-type",
                    "HasPart requires system nodes at both ends",
                    subjects,
                )
            if src_sys.level is Level.STRUCTURE:
                return Violation(
                    "structure-decomposition",
                    f"structure node {edge.src!r} cannot decompose further",
                    subjects,
                )
            if dst_sys.level.rank != src_sys.level.rank + 1:
                return Violation(
                    "level-not-adjacent",
                    f"non-adjacent levels: {src_sys.level.value} -> {dst_sys.level.value}",
                    subjects,
                )
            return None

        if edge.kind is EdgeKind.STEP_AFTER:
            if src_sys is None or dst_sys is None:
                return Violation(
                    "step-after-endpoint-type",
                    "StepAfter requires system nodes at both ends",
                    subjects,
                )
            if edge.src == edge.dst:
                return Violation(
                    "self-sequence", f"{edge.src!r} cannot step after itself", subjects
                )
            if src_sys.level is not dst_sys.level:
                return Violation(
                    "cross-level-sequence",
                    f"cross-level sequence: {src_sys.level.value} vs {dst_sys.level.value}",
                    subjects,
                )
            return None

        if edge.kind is EdgeKind.HAS_FAILURE:
            if src_sys is None or edge.dst not in self.failure_nodes:
                return Violation(
                    "has-failure-endpoint-type",
                    "HasFailure runs from a system node to a failure node",
                    subjects,
                )
            attached = self._attachments(edge.dst)
            if attached:
                return Violation(
                    "multi-attachment",
                    f"failure {edge.dst!r} is already attached to {sorted(attached)!r}",
                    (edge.dst, *sorted(attached)),
                )
            return None

        if edge.kind is EdgeKind.HAS_CAUSE:
            if edge.src not in self.failure_nodes or edge.dst not in self.failure_nodes:
                return Violation(
                    "has-cause-endpoint-type",
                    "HasCause runs between failure nodes",
                    subjects,
                )
            if edge.src == edge.dst:
                return Violation(
                    "self-cause", f"{edge.src!r} cannot cause itself", subjects
                )
            return None

        raise DomainError(f"unhandled edge kind {edge.kind!r}")  # pragma: no cover

    # -- causation views ---------------------------------------------------

    def direct_causes_of(self, failure_id: str) -> list[str]:
        """Ids of the stored causes of ``failure_id``, sorted."""
        self.failure_node(failure_id)
        return sorted(self._out.get((EdgeKind.HAS_CAUSE, failure_id), ()))

    def effects_of(self, failure_id: str) -> list[str]:
        """Ids of failures that list ``failure_id`` as a direct cause, sorted.

        This is the computed reverse of the stored causation direction.
        """
        self.failure_node(failure_id)
        return sorted(self._in.get((EdgeKind.HAS_CAUSE, failure_id), ()))

    def attachment_of(self, failure_id: str) -> str | None:
        """System id the failure is attached to, or None if unattached."""
        self.failure_node(failure_id)
        attached = self._attachments(failure_id)
        if len(attached) == 1:
            return next(iter(attached))
        return None

    def _attachments(self, failure_id: str) -> set[str]:
        return set(self._in.get((EdgeKind.HAS_FAILURE, failure_id), ()))

    def _cause_adjacency(self) -> dict[str, list[str]]:
        adjacency: dict[str, list[str]] = {}
        for edge in self.edges:
            if edge.kind is EdgeKind.HAS_CAUSE:
                adjacency.setdefault(edge.src, []).append(edge.dst)
        for targets in adjacency.values():
            targets.sort()
        return adjacency

    def _cause_path(self, start: str, goal: str) -> list[str] | None:
        """Path from ``start`` to ``goal`` along causation edges, if any."""
        stack = [start]
        parent: dict[str, str] = {start: ""}
        while stack:
            current = stack.pop()
            if current == goal:
                path = [current]
                while parent[path[-1]]:
                    path.append(parent[path[-1]])
                path.reverse()
                return path
            for nxt in sorted(self._out.get((EdgeKind.HAS_CAUSE, current), ())):
                if nxt not in parent:
                    parent[nxt] = current
                    stack.append(nxt)
        return None

    # -- whole-graph validation -------------------------------------------

    def validate(self) -> ValidationReport:
        """Run every structural check and refresh :attr:`validated`.

        Side-effect-free apart from the flag; safe to call repeatedly.
        """
        violations: list[Violation] = []

        for edge in sorted(self.edges, key=Edge.sort_key):
            if edge.src not in self or edge.dst not in self:
                missing = edge.src if edge.src not in self else edge.dst
                violations.append(
                    Violation(
                        "unknown-endpoint",
                        f"edge references unknown id {missing!r}",
                        (edge.src, edge.dst),
                    )
                )
                continue
            # Attachment arity is audited below, once per failure node.
            if edge.kind is EdgeKind.HAS_FAILURE:
                src_ok = edge.src in self.system_nodes
                dst_ok = edge.dst in self.failure_nodes
                if not (src_ok and dst_ok):
                    violations.append(
                        Violation(
                            "has-failure-endpoint-type",
                            "HasFailure runs from a system node to a failure node",
                            (edge.src, edge.dst),
                        )
                    )
                continue
            violation = self._kind_violation(edge)
            if violation is not None:
                violations.append(violation)

        for failure_id in sorted(self.failure_nodes):
            attached = self._attachments(failure_id)
            if not attached:
                violations.append(
                    Violation(
                        "unattached-failure",
                        f"failure {failure_id!r} has no attachment",
                        (failure_id,),
                    )
                )
            elif len(attached) > 1:
                violations.append(
                    Violation(
                        "multi-attachment",
                        f"failure {failure_id!r} attached {len(attached)} times",
                        (failure_id, *sorted(attached)),
                    )
                )

        for cycle in self._cause_cycles():
            listed = " -> ".join(cycle + [cycle[0]])
            violations.append(
                Violation("cause-cycle", f"causal cycle: {listed}", tuple(cycle))
            )

        violations.extend(self._orphan_violations())

        self.validated = not violations
        return ValidationReport(violations)

    def _cause_cycles(self) -> list[list[str]]:
        """Strongly connected components of size > 1, each sorted, all sorted."""
        adjacency = self._cause_adjacency()
        index_of: dict[str, int] = {}
        lowlink: dict[str, int] = {}
        on_stack: set[str] = set()
        stack: list[str] = []
        counter = 0
        cycles: list[list[str]] = []

        def strongconnect(root: str) -> None:
            nonlocal counter
            work: list[tuple[str, Iterator[str]]] = [(root, iter(adjacency.get(root, ())))]
            index_of[root] = lowlink[root] = counter
            counter += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                node, children = work[-1]
                advanced = False
                for child in children:
                    if child not in index_of:
                        index_of[child] = lowlink[child] = counter
                        counter += 1
                        stack.append(child)
                        on_stack.add(child)
                        work.append((child, iter(adjacency.get(child, ()))))
                        advanced = True
                        break
                    if child in on_stack:
                        lowlink[node] = min(lowlink[node], index_of[child])
                if advanced:
                    continue
                work.pop()
                if work:
                    parent = work[-1][0]
                    lowlink[parent] = min(lowlink[parent], lowlink[node])
                if lowlink[node] == index_of[node]:
                    component: list[str] = []
                    while True:
                        member = stack.pop()
                        on_stack.discard(member)
                        component.append(member)
                        if member == node:
                            break
                    if len(component) > 1:
                        cycles.append(sorted(component))

        for node_id in sorted(adjacency):
            if node_id not in index_of:
                strongconnect(node_id)
        return sorted(cycles)

    def _orphan_violations(self) -> list[Violation]:
        roots = [
            node_id
            for node_id, node in self.system_nodes.items()
            if node.level is Level.LINE_FUNCTION
        ]
        reachable: set[str] = set()
        frontier = list(roots)
        while frontier:
            current = frontier.pop()
            if current in reachable:
                continue
            reachable.add(current)
            frontier.extend(self._out.get((EdgeKind.HAS_PART, current), ()))
        return [
            Violation(
                "orphan-system",
                f"system {node_id!r} is unreachable from any line function",
                (node_id,),
            )
            for node_id in sorted(self.system_nodes)
            if node_id not in reachable
        ]


def validate_graph(graph: KnowledgeGraph) -> ValidationReport:
    """Module-level alias for :meth:`KnowledgeGraph.validate`."""
    return graph.validate()
