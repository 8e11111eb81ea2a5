"""Deterministic synthetic lines for evaluating retrieval under vocab drift.

The generator builds a small five-level line, a corpus of failure records
with known causal chains, and an evaluation suite whose ground truth is
read straight off those chains. A drift rate rewrites failure-label
tokens through the bundled synonym table (system labels never drift), so
the wording gap between queries and records is fully controlled: at rate
0 records use canonical vocabulary, at rate 1 every known token is
swapped and only the plant context still speaks the query's language.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from fbsdiag.bundled import synonym_table
from fbsdiag.errors import DomainError
from fbsdiag.evaluation import EvalSuite, GroundTruth, SuiteQuery
from fbsdiag.ingest import (
    CausePair,
    FailureEntry,
    ModelEntry,
    ModelSpec,
    RecordSpec,
    add_maintenance_record,
    build_fbs_model,
)
from fbsdiag.ontology import KnowledgeGraph, Level

__all__ = ["SyntheticDataset", "gen_synthetic_line", "realize"]

_PARTS = (
    "roof", "wheel", "axle", "chassis", "bumper", "door",
    "hood", "panel", "spoiler", "windshield", "grille", "mirror",
)
_PROCESS_ACTIONS = (
    "assembly", "pressing", "inspection", "fastening", "polishing", "mounting",
    "calibration", "sorting", "packing", "welding", "sealing", "trimming",
)
_ELEMENT_ACTIONS = (
    "feed", "grip", "clamp", "measure", "release",
    "eject", "scan", "rotate", "index", "align",
)
_MECHANISMS = (
    "feeder", "gripper", "fixture", "probe", "ejector",
    "scanner", "turntable", "indexer", "aligner", "hoist",
)
_COMPONENTS = (
    "bearing", "seal", "belt", "sensor", "spring",
    "guide", "nozzle", "coupling", "motor", "rail",
)
_SYMPTOMS = ("misalignment", "skew", "tilt")
_DEFECTS = ("wear", "looseness", "contamination", "fatigue", "misadjustment")


@dataclass
class SyntheticDataset:
    model_spec: ModelSpec
    records: list[RecordSpec]
    suite: EvalSuite
    seed: int
    drift_rate: float = field(default=0.0)


def _drift_label(label: str, rate: float, rng: random.Random, table: dict[str, str]) -> str:
    tokens = label.split()
    out = []
    for token in tokens:
        replacement = table.get(token)
        if replacement is not None and rng.random() < rate:
            out.append(replacement)
        else:
            out.append(token)
    return " ".join(out)


def gen_synthetic_line(
    processes: int,
    elements_per_process: int,
    records: int,
    vocab_drift_rate: float,
    seed: int,
) -> SyntheticDataset:
    """Build (model, records, suite) for one drift regime, reproducibly.

    Records rotate over the processes, so ``records / processes`` is the
    number of relevant records behind each query; within a process they
    rotate over its elements, so consecutive records of one process fault
    different mechanisms and their cause wording stays distinct. Each
    chain runs observed symptom -> element-level slip -> mechanism motion
    fault -> one to three structural root causes; the suite's ground truth
    per process is the union of its records' cause labels, with every
    drifted wording registered as an alias of its canonical form.
    """
    if processes < 1 or processes > len(_PARTS):
        raise DomainError(
            f"processes must be between 1 and {len(_PARTS)}", code="bad-params"
        )
    if elements_per_process < 1 or elements_per_process > len(_ELEMENT_ACTIONS):
        raise DomainError(
            f"elements_per_process must be between 1 and {len(_ELEMENT_ACTIONS)}",
            code="bad-params",
        )
    if records < 1:
        raise DomainError("records must be at least 1", code="bad-params")
    if not 0.0 <= vocab_drift_rate <= 1.0:
        raise DomainError("vocab_drift_rate must lie in [0, 1]", code="bad-params")

    rng = random.Random(seed)
    table = synonym_table()

    parts = _PARTS[:processes]
    process_labels = [
        f"{parts[p]} {_PROCESS_ACTIONS[p % len(_PROCESS_ACTIONS)]}" for p in range(processes)
    ]

    def mech(p: int, j: int) -> str:
        return _MECHANISMS[j % len(_MECHANISMS)]

    def component(p: int, j: int) -> str:
        return _COMPONENTS[(p + j) % len(_COMPONENTS)]

    process_entries: list[ModelEntry] = []
    for p in range(processes):
        element_entries: list[ModelEntry] = []
        for j in range(elements_per_process):
            action = _ELEMENT_ACTIONS[j]
            structure = ModelEntry(
                label=f"{parts[p]} {mech(p, j)} {component(p, j)}",
                id=f"line/p{p}/e{j}/s0",
            )
            behavior = ModelEntry(
                label=f"{parts[p]} {mech(p, j)} actuation",
                id=f"line/p{p}/e{j}/b0",
                children=[structure],
            )
            element_entries.append(
                ModelEntry(
                    label=f"{action} {parts[p]}",
                    id=f"line/p{p}/e{j}",
                    children=[behavior],
                )
            )
        process_entries.append(
            ModelEntry(
                label=process_labels[p],
                id=f"line/p{p}",
                children=element_entries,
                sequences=[[entry.label for entry in element_entries]]
                if len(element_entries) > 1
                else [],
            )
        )
    root = ModelEntry(
        label="assembly line",
        id="line",
        level=Level.LINE_FUNCTION,
        children=process_entries,
        sequences=[[label for label in process_labels]] if processes > 1 else [],
    )
    model_spec = ModelSpec(
        roots=[root], source=f"synthetic line (seed {seed}, drift {vocab_drift_rate:g})"
    )

    symptoms = [_SYMPTOMS[p % len(_SYMPTOMS)] for p in range(processes)]

    record_specs: list[RecordSpec] = []
    # canonical label -> set of drifted wordings, per process topic
    gt_forms: list[dict[str, set[str]]] = [dict() for _ in range(processes)]
    gt_order: list[list[str]] = [[] for _ in range(processes)]

    for r in range(records):
        p = r % processes
        j = (r // processes) % elements_per_process
        part = parts[p]
        action = _ELEMENT_ACTIONS[j]
        mechanism = mech(p, j)
        comp = component(p, j)

        chain_length = rng.choice((4, 5, 5, 6))
        defects = rng.sample(_DEFECTS, 2)
        canonical = [
            f"{part} {symptoms[p]}",
            f"{part} displaced during {action}",
            f"{part} {mechanism} motion lag",
            f"{part} {mechanism} {comp} {defects[0]}",
        ]
        attach = [
            f"line/p{p}",
            f"line/p{p}/e{j}",
            f"line/p{p}/e{j}/b0",
            f"line/p{p}/e{j}/s0",
        ]
        categories = ["accuracy", "accuracy", "motion", "mechanism_structure"]
        if chain_length >= 5:
            canonical.append(f"{part} {mechanism} {comp} {defects[1]}")
            attach.append(f"line/p{p}/e{j}/s0")
            categories.append("mechanism_structure")
        if chain_length >= 6:
            canonical.append(f"{part} {mechanism} lubrication overdue")
            attach.append(f"line/p{p}/e{j}/s0")
            categories.append("mechanism_structure")

        drifted = [_drift_label(label, vocab_drift_rate, rng, table) for label in canonical]

        failures = [
            FailureEntry(
                key=f"f{idx}",
                label=drifted[idx],
                category=categories[idx],
                attach=attach[idx],
            )
            for idx in range(len(canonical))
        ]
        causes = [
            CausePair(effect=f"f{idx}", cause=f"f{idx + 1}")
            for idx in range(len(canonical) - 1)
        ]
        record_specs.append(
            RecordSpec(record_id=f"syn-{r:04d}", failures=failures, causes=causes)
        )

        for idx in range(1, len(canonical)):  # causes only; the symptom is the query
            forms = gt_forms[p].setdefault(canonical[idx], set())
            if canonical[idx] not in gt_order[p]:
                gt_order[p].append(canonical[idx])
            if drifted[idx] != canonical[idx]:
                forms.add(drifted[idx])

    queries: list[SuiteQuery] = []
    for p in range(processes):
        if not gt_order[p]:
            continue
        query_id = f"q{p:02d}"
        ground_truth = GroundTruth(
            query_id=query_id,
            items=tuple(gt_order[p]),
            aliases={
                canonical: tuple(sorted(gt_forms[p][canonical]))
                for canonical in gt_order[p]
                if gt_forms[p][canonical]
            },
        )
        queries.append(
            SuiteQuery(
                query_id=query_id,
                description=f"{parts[p]} {symptoms[p]} at {process_labels[p]}",
                ground_truth=ground_truth,
                level=Level.PROCESS_FUNCTION,
            )
        )

    return SyntheticDataset(
        model_spec=model_spec,
        records=record_specs,
        suite=EvalSuite(queries=queries),
        seed=seed,
        drift_rate=vocab_drift_rate,
    )


def realize(dataset: SyntheticDataset) -> KnowledgeGraph:
    """Build the graph and replay every record of the dataset."""
    graph = build_fbs_model(dataset.model_spec)
    for record in dataset.records:
        add_maintenance_record(graph, record)
    return graph
