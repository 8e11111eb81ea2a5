"""Random valid-graph builder shared by the randomized tests.

Everything goes through the public mutation API, so the result is valid
by construction; the ``validate()`` call at the end is a tripwire, not a
filter. Causal edges only ever point from a later failure to an earlier
one in generation order, which keeps them acyclic without retries.
"""

from __future__ import annotations

import random

from fbsdiag.ontology import (
    Edge,
    EdgeKind,
    FailureNode,
    KnowledgeGraph,
    Level,
    SystemNode,
)

CATEGORIES = ("motion", "mechanism_structure", "accuracy")

_NOUNS = ("gear", "belt", "chuck", "rail", "sensor", "motor", "arm", "clamp", "feeder", "pallet")
_FAULTS = ("wear", "jam", "drift", "slack", "crack", "stall")


def random_graph(
    rng: random.Random,
    *,
    max_systems: int = 18,
    max_records: int = 3,
    max_failures_per_record: int = 4,
) -> KnowledgeGraph:
    graph = KnowledgeGraph()
    by_level: dict[Level, list[str]] = {level: [] for level in Level}
    children: dict[str, list[str]] = {}

    def spawn(level: Level, parent: str | None) -> str:
        node_id = f"s{len(graph.system_nodes)}"
        graph.add_system_node(SystemNode(node_id, f"{rng.choice(_NOUNS)} {node_id}", level))
        by_level[level].append(node_id)
        if parent is not None:
            graph.add_edge(Edge(EdgeKind.HAS_PART, parent, node_id))
            children.setdefault(parent, []).append(node_id)
        return node_id

    spawn(Level.LINE_FUNCTION, None)
    if rng.random() < 0.15:
        spawn(Level.LINE_FUNCTION, None)

    levels = list(Level)
    for depth in range(1, len(levels)):
        for parent in list(by_level[levels[depth - 1]]):
            budget = max_systems - len(graph.system_nodes)
            if budget <= 0:
                break
            for _ in range(rng.randint(0, min(3, budget))):
                spawn(levels[depth], parent)

    # Sibling step chains; shuffled first so the chain order is arbitrary.
    for kids in children.values():
        if len(kids) >= 2 and rng.random() < 0.7:
            chain = kids[:]
            rng.shuffle(chain)
            cut = rng.randint(2, len(chain))
            for earlier, later in zip(chain, chain[1:cut]):
                graph.add_edge(Edge(EdgeKind.STEP_AFTER, later, earlier))

    # Occasionally sequence two same-level nodes under different parents;
    # the rules allow that, only the level has to agree.
    for level in levels:
        pool = by_level[level]
        if len(pool) >= 2 and rng.random() < 0.2:
            a, b = rng.sample(pool, 2)
            edge = Edge(EdgeKind.STEP_AFTER, a, b)
            if edge not in graph.edges and Edge(EdgeKind.STEP_AFTER, b, a) not in graph.edges:
                graph.add_edge(edge)

    system_ids = sorted(graph.system_nodes)
    earlier_failures: list[str] = []
    for r in range(rng.randint(0, max_records)):
        record_id = f"r{r}"
        count = rng.randint(1, max_failures_per_record)
        fids = []
        for i in range(count):
            fid = f"{record_id}:f{i}"
            graph.add_failure_node(
                FailureNode(
                    fid,
                    f"{rng.choice(_NOUNS)} {rng.choice(_FAULTS)}",
                    rng.choice(CATEGORIES),
                    record_id,
                )
            )
            graph.add_edge(Edge(EdgeKind.HAS_FAILURE, rng.choice(system_ids), fid))
            fids.append(fid)
        for i in range(1, count):
            if rng.random() < 0.8:
                graph.add_edge(Edge(EdgeKind.HAS_CAUSE, fids[i - 1], fids[i]))
        for i in range(count):
            for j in range(i + 2, count):
                if rng.random() < 0.15:
                    edge = Edge(EdgeKind.HAS_CAUSE, fids[i], fids[j])
                    if edge not in graph.edges:
                        graph.add_edge(edge)
        if earlier_failures and rng.random() < 0.4:
            graph.add_edge(
                Edge(EdgeKind.HAS_CAUSE, rng.choice(fids), rng.choice(earlier_failures))
            )
        earlier_failures.extend(fids)

    report = graph.validate()
    assert report.ok, report.summary()
    return graph
