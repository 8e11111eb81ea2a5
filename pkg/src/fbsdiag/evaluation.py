"""Precision/recall scoring of ranked cause lists, and the ablation runner.

Ground truth is a set of canonical cause labels with optional aliases.
Matching is insensitive to case and whitespace runs. Precision counts
every matching output (duplicates included); recall counts distinct
canonical labels covered.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from fbsdiag.chunking import METHOD_PROPOSED, METHODS, generate_chunks
from fbsdiag.diagnose import DEFAULT_K, DiagnosisQuery, infer_causes
from fbsdiag.embedding import build_index, make_provider
from fbsdiag.errors import DiagnosisError, EvalError, ParseError
from fbsdiag.ontology import KnowledgeGraph, Level, parse_level

__all__ = [
    "EvalResult",
    "EvalSuite",
    "GroundTruth",
    "SuiteQuery",
    "match",
    "parse_suite",
    "precision_at_n",
    "recall_at_n",
    "run_ablation",
    "suite_to_document",
    "write_results",
]


def _normalize(label: str) -> str:
    return " ".join(label.casefold().split())


@dataclass(frozen=True)
class GroundTruth:
    """Canonical labels for one query; aliases map alternative wordings back."""

    query_id: str
    items: tuple[str, ...]
    aliases: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.items:
            raise EvalError(
                f"ground truth {self.query_id!r} has no items", code="empty-ground-truth"
            )
        normalized = [_normalize(item) for item in self.items]
        if len(set(normalized)) != len(normalized):
            raise EvalError(
                f"ground truth {self.query_id!r} has duplicate items", code="duplicate-item"
            )
        item_set = set(normalized)
        for canonical in self.aliases:
            if _normalize(canonical) not in item_set:
                raise EvalError(
                    f"ground truth {self.query_id!r}: alias key {canonical!r} is not an item",
                    code="alias-key-unknown",
                )
        seen: dict[str, str] = {}
        for canonical, forms in self.aliases.items():
            for form in forms:
                normalized_form = _normalize(form)
                owner = seen.get(normalized_form)
                if owner is not None and owner != canonical:
                    raise EvalError(
                        f"ground truth {self.query_id!r}: alias {form!r} claimed by"
                        f" both {owner!r} and {canonical!r}",
                        code="alias-collision",
                    )
                seen[normalized_form] = canonical


def match(output_label: str, gt: GroundTruth) -> str | None:
    """Canonical label the output counts for, or None; first item wins."""
    wanted = _normalize(output_label)
    for item in gt.items:
        if _normalize(item) == wanted:
            return item
    for item in gt.items:
        for form in gt.aliases.get(item, ()):
            if _normalize(form) == wanted:
                return item
    return None


def precision_at_n(output_labels: Sequence[str], gt: GroundTruth, n: int) -> float:
    """Matching outputs among the top n, over n. Duplicates each count."""
    if n < 1:
        raise EvalError("n must be at least 1", code="bad-n")
    hits = sum(1 for label in output_labels[:n] if match(label, gt) is not None)
    return hits / n


def recall_at_n(output_labels: Sequence[str], gt: GroundTruth, n: int) -> float:
    """Distinct canonical labels covered in the top n, over the truth size."""
    if n < 1:
        raise EvalError("n must be at least 1", code="bad-n")
    covered = {
        canonical
        for label in output_labels[:n]
        if (canonical := match(label, gt)) is not None
    }
    return len(covered) / len(gt.items)


# -- suites ----------------------------------------------------------------


@dataclass(frozen=True)
class SuiteQuery:
    query_id: str
    description: str
    ground_truth: GroundTruth
    level: Level | None = None
    attach_hint: str | None = None


@dataclass
class EvalSuite:
    queries: list[SuiteQuery]

    def __post_init__(self) -> None:
        ids = [query.query_id for query in self.queries]
        if len(set(ids)) != len(ids):
            raise EvalError("suite has duplicate query ids", code="duplicate-query-id")


def parse_suite(data: Any) -> EvalSuite:
    if not isinstance(data, Mapping) or "queries" not in data:
        raise ParseError("suite: expected a mapping with a 'queries' list")
    raw_queries = data["queries"]
    if not isinstance(raw_queries, list) or not raw_queries:
        raise ParseError("suite.queries: expected a non-empty list")
    queries: list[SuiteQuery] = []
    for index, raw in enumerate(raw_queries):
        where = f"queries[{index}]"
        if not isinstance(raw, Mapping):
            raise ParseError(f"{where}: expected a mapping")
        for needed in ("id", "description", "ground_truth"):
            if needed not in raw:
                raise ParseError(f"{where}: missing field {needed!r}")
        gt_raw = raw["ground_truth"]
        if not isinstance(gt_raw, Mapping) or "items" not in gt_raw:
            raise ParseError(f"{where}.ground_truth: expected a mapping with 'items'")
        items = gt_raw["items"]
        if not isinstance(items, list):
            raise ParseError(f"{where}.ground_truth.items: expected a list")
        aliases_raw = gt_raw.get("aliases") or {}
        if not isinstance(aliases_raw, Mapping):
            raise ParseError(f"{where}.ground_truth.aliases: expected a mapping")
        aliases = {
            str(canonical): tuple(str(form) for form in forms or [])
            for canonical, forms in aliases_raw.items()
        }
        gt = GroundTruth(
            query_id=str(raw["id"]),
            items=tuple(str(item) for item in items),
            aliases=aliases,
        )
        level_raw = raw.get("level")
        queries.append(
            SuiteQuery(
                query_id=str(raw["id"]),
                description=str(raw["description"]),
                ground_truth=gt,
                level=parse_level(str(level_raw)) if level_raw is not None else None,
                attach_hint=str(raw["attach_hint"]) if raw.get("attach_hint") else None,
            )
        )
    return EvalSuite(queries=queries)


def suite_to_document(suite: EvalSuite) -> dict[str, Any]:
    return {
        "queries": [
            {
                "id": query.query_id,
                "description": query.description,
                "level": query.level.value if query.level else None,
                "attach_hint": query.attach_hint,
                "ground_truth": {
                    "items": list(query.ground_truth.items),
                    "aliases": {
                        canonical: list(forms)
                        for canonical, forms in query.ground_truth.aliases.items()
                    },
                },
            }
            for query in suite.queries
        ]
    }


# -- ablation --------------------------------------------------------------


@dataclass(frozen=True)
class EvalResult:
    """Curves for one (query, method) pair; slot i holds the metric at n=i+1."""

    query_id: str
    method: str
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    flag: str = ""

    @property
    def n_max(self) -> int:
        return len(self.precision)


def run_ablation(
    graph: KnowledgeGraph,
    suite: EvalSuite,
    methods: Sequence[str],
    provider_config: Mapping[str, Any] | None = None,
    *,
    k: int = DEFAULT_K,
    dedup: bool = False,
    include_ancestor_path: bool = False,
    out_dir: str | os.PathLike[str] | None = None,
) -> list[EvalResult]:
    """Score every query under every method on the same graph.

    Each method (and, for proposed, each level used by the suite) gets its
    own chunking and its own freshly fitted index. A query that yields no
    chunks at its level scores zero and is flagged rather than aborting
    the run. Results come back sorted by (query, method); with ``out_dir``
    set, results.tsv, curves.tsv and summary.txt land there.
    """
    for method in methods:
        if method not in METHODS:
            raise EvalError(f"unknown method {method!r}", code="unknown-method")
    if not methods:
        raise EvalError("no methods requested", code="no-methods")

    indexes: dict[tuple[str, Level | None], Any] = {}

    def index_for(method: str, level: Level | None) -> Any:
        key = (method, level if method == METHOD_PROPOSED else None)
        if key not in indexes:
            chunks = generate_chunks(
                graph,
                method,
                level if method == METHOD_PROPOSED else None,
                include_ancestor_path=include_ancestor_path,
            )
            if not chunks:
                indexes[key] = None
            else:
                indexes[key] = build_index(chunks, make_provider(provider_config))
        return indexes[key]

    results: list[EvalResult] = []
    for query in suite.queries:
        n_max = len(query.ground_truth.items)
        for method in sorted(set(methods)):
            if method == METHOD_PROPOSED and query.level is None:
                raise EvalError(
                    f"query {query.query_id!r} has no level but the proposed method needs one",
                    code="level-required",
                )
            index = index_for(method, query.level)
            flag = ""
            if index is None:
                labels: list[str] = []
                flag = "no-chunks"
            else:
                diagnosis = DiagnosisQuery(
                    description=query.description,
                    method=method,
                    n=n_max,
                    level=query.level if method == METHOD_PROPOSED else None,
                    attach_hint=query.attach_hint if method == METHOD_PROPOSED else None,
                )
                try:
                    candidates = infer_causes(graph, index, diagnosis, k=k, dedup=dedup)
                except DiagnosisError as exc:
                    if exc.code != "empty-index":
                        raise
                    candidates = []
                    flag = "empty-index"
                labels = [candidate.label for candidate in candidates]
            results.append(
                EvalResult(
                    query_id=query.query_id,
                    method=method,
                    precision=tuple(
                        precision_at_n(labels, query.ground_truth, n)
                        for n in range(1, n_max + 1)
                    ),
                    recall=tuple(
                        recall_at_n(labels, query.ground_truth, n)
                        for n in range(1, n_max + 1)
                    ),
                    flag=flag,
                )
            )

    results.sort(key=lambda result: (result.query_id, result.method))
    if out_dir is not None:
        write_results(results, out_dir, k=k)
    return results


def write_results(
    results: Iterable[EvalResult], out_dir: str | os.PathLike[str], *, k: int = DEFAULT_K
) -> tuple[Path, Path, Path]:
    """Write results.tsv (per query), curves.tsv (means) and summary.txt."""
    ordered = sorted(results, key=lambda result: (result.query_id, result.method))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    results_path = out / "results.tsv"
    lines = ["query\tmethod\tn\tprecision\trecall"]
    for result in ordered:
        for slot in range(result.n_max):
            lines.append(
                "%s\t%s\t%d\t%.6f\t%.6f"
                % (
                    result.query_id,
                    result.method,
                    slot + 1,
                    result.precision[slot],
                    result.recall[slot],
                )
            )
    results_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    methods = sorted({result.method for result in ordered})
    curves_path = out / "curves.tsv"
    curve_lines = ["method\tn\tmean_precision\tmean_recall"]
    for method in methods:
        rows = [result for result in ordered if result.method == method]
        depth = max((result.n_max for result in rows), default=0)
        for n in range(1, depth + 1):
            # A query whose truth is shorter than n contributes its final value.
            precisions = [result.precision[min(n, result.n_max) - 1] for result in rows]
            recalls = [result.recall[min(n, result.n_max) - 1] for result in rows]
            curve_lines.append(
                "%s\t%d\t%.6f\t%.6f"
                % (method, n, sum(precisions) / len(rows), sum(recalls) / len(rows))
            )
    curves_path.write_text("\n".join(curve_lines) + "\n", encoding="utf-8")

    summary_path = out / "summary.txt"
    summary = [
        "ablation summary",
        f"queries: {len({result.query_id for result in ordered})}"
        f"  methods: {', '.join(methods)}  k: {k}",
        "",
    ]
    for result in ordered:
        line = "%-12s %-9s n=%-3d P@n=%.3f R@n=%.3f" % (
            result.query_id,
            result.method,
            result.n_max,
            result.precision[-1],
            result.recall[-1],
        )
        if result.flag:
            line += f"  [{result.flag}]"
        summary.append(line)
    summary.append("")
    for method in methods:
        rows = [result for result in ordered if result.method == method]
        mean_p = sum(result.precision[-1] for result in rows) / len(rows)
        mean_r = sum(result.recall[-1] for result in rows) / len(rows)
        summary.append("mean %-9s P@N=%.3f R@N=%.3f" % (method, mean_p, mean_r))
    summary_path.write_text("\n".join(summary) + "\n", encoding="utf-8")
    return results_path, curves_path, summary_path
