"""HTTP front end: browse the graph, submit records, run diagnoses.

Every response is an envelope: ``{"status": "ok", "payload": ...}`` or
``{"status": "error", "error": {"code", "message", "detail"}}``. Writes
are serialized through one lock and applied copy-on-write, so readers
always see a complete snapshot; chunk indexes are rebuilt lazily after a
write, and a diagnosis blocks until the rebuild is done.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from fbsdiag import __version__
from fbsdiag.chunking import METHOD_PROPOSED, generate_chunks
from fbsdiag.diagnose import DEFAULT_K, DiagnosisQuery, infer_causes
from fbsdiag.embedding import build_index, make_provider
from fbsdiag.errors import DomainError, ParseError
from fbsdiag.evaluation import parse_suite, run_ablation
from fbsdiag.ingest import add_maintenance_record, list_records, parse_record_spec
from fbsdiag.ontology import EdgeKind, KnowledgeGraph, Level, parse_level
from fbsdiag.store import load_graph, save_graph

__all__ = ["ServiceConfig", "DiagService", "create_app", "load_config"]


@dataclass
class ServiceConfig:
    graph_path: str = ""
    host: str = "127.0.0.1"
    port: int = 8080
    embedder: dict[str, Any] = field(default_factory=dict)
    retrieval_k: int = DEFAULT_K
    static_dir: str = ""


def load_config(
    path: str | os.PathLike[str] | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> ServiceConfig:
    """Config file, then environment, then explicit overrides.

    Recognized environment variables: ``PORT``, ``GRAPH_PATH`` and
    ``EMBED_KEY_ENV`` (the name of the variable holding the API key).
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: not valid YAML: {exc}") from exc
        if loaded is not None:
            if not isinstance(loaded, Mapping):
                raise ParseError(f"{path}: expected a mapping at the top level")
            data = dict(loaded)

    embedder = dict(data.get("embedder") or {})
    retrieval = dict(data.get("retrieval") or {})
    config = ServiceConfig(
        graph_path=str(data.get("graph_path") or ""),
        host=str(data.get("host") or "127.0.0.1"),
        port=int(data.get("port") or 8080),
        embedder=embedder,
        retrieval_k=int(retrieval.get("k") or DEFAULT_K),
        static_dir=str(data.get("static_dir") or ""),
    )

    if os.environ.get("PORT"):
        config.port = int(os.environ["PORT"])
    if os.environ.get("GRAPH_PATH"):
        config.graph_path = os.environ["GRAPH_PATH"]
    if os.environ.get("EMBED_KEY_ENV"):
        config.embedder["key_env"] = os.environ["EMBED_KEY_ENV"]

    for key, value in (overrides or {}).items():
        if value in (None, ""):
            continue
        if key == "retrieval_k":
            config.retrieval_k = int(value)
        elif key == "embedder":
            config.embedder.update(value)
        elif hasattr(config, key):
            setattr(config, key, value)
    return config


class DiagService:
    """Owns the graph snapshot, the write lock and the index cache."""

    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        if config.graph_path and Path(config.graph_path).exists():
            graph = load_graph(config.graph_path)
        else:
            graph = KnowledgeGraph()
            graph.validate()
        self.graph = graph
        self.version = 0
        self._write_lock = threading.Lock()
        self._index_lock = threading.Lock()
        self._index_cache: dict[tuple[str, str], tuple[int, Any]] = {}

    def submit_record(self, body: Mapping[str, Any]) -> dict[str, Any]:
        spec = parse_record_spec(body)
        with self._write_lock:
            staged = self.graph.copy()
            add_maintenance_record(staged, spec)
            if self.config.graph_path:
                save_graph(staged, self.config.graph_path)
            self.graph = staged
            self.version += 1
        return {
            "record_id": spec.record_id,
            "failures_added": len(spec.failures),
            "record_count": len(list_records(self.graph)),
        }

    def index_for(self, method: str, level: Level | None):
        key = (method, level.value if level else "")
        with self._index_lock:
            snapshot = self.graph
            version = self.version
            cached = self._index_cache.get(key)
            if cached is not None and cached[0] == version:
                return snapshot, cached[1]
            chunks = generate_chunks(snapshot, method, level)
            index = build_index(chunks, make_provider(self.config.embedder))
            self._index_cache[key] = (version, index)
            return snapshot, index


def _ok(payload: Any) -> dict[str, Any]:
    return {"status": "ok", "payload": payload}


def _error_response(code: str, message: str, status: int, detail: Any = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "status": "error",
            "error": {"code": code, "message": message, "detail": detail},
        },
    )


_STATUS_BY_CODE = {
    "unknown-id": 404,
    "parse-error": 400,
}


def _tree_payload(graph: KnowledgeGraph) -> dict[str, Any]:
    children: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.HAS_PART:
            children.setdefault(edge.src, []).append(edge.dst)
    after: dict[str, list[str]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.STEP_AFTER:
            after.setdefault(edge.src, []).append(edge.dst)
    attached: dict[str, list[dict[str, str]]] = {}
    for edge in graph.edges:
        if edge.kind is EdgeKind.HAS_FAILURE:
            failure = graph.failure_nodes[edge.dst]
            attached.setdefault(edge.src, []).append(
                {"id": failure.id, "label": failure.label, "category": failure.category}
            )

    def order_siblings(ids: list[str]) -> list[str]:
        # Step order first (predecessors before followers), then id.
        sibling_set = set(ids)
        indegree = {node_id: 0 for node_id in ids}
        followers: dict[str, list[str]] = {node_id: [] for node_id in ids}
        for node_id in ids:
            for earlier in after.get(node_id, ()):
                if earlier in sibling_set:
                    indegree[node_id] += 1
                    followers[earlier].append(node_id)
        ready = sorted(node_id for node_id, deg in indegree.items() if deg == 0)
        ordered: list[str] = []
        while ready:
            node_id = ready.pop(0)
            ordered.append(node_id)
            for follower in sorted(followers[node_id]):
                indegree[follower] -= 1
                if indegree[follower] == 0:
                    ready.append(follower)
            ready.sort()
        ordered.extend(sorted(node_id for node_id in ids if node_id not in set(ordered)))
        return ordered

    def build(node_id: str) -> dict[str, Any]:
        node = graph.system_nodes[node_id]
        child_nodes = [build(child) for child in order_siblings(children.get(node_id, []))]
        own = sorted(attached.get(node_id, []), key=lambda brief: brief["id"])
        subtree = len(own) + sum(child["subtree_failures"] for child in child_nodes)
        return {
            "id": node.id,
            "label": node.label,
            "level": node.level.value,
            "description": node.description,
            "failures": len(own),
            "attached": own,
            "subtree_failures": subtree,
            "after": sorted(after.get(node_id, [])),
            "children": child_nodes,
        }

    roots = [
        node_id
        for node_id, node in graph.system_nodes.items()
        if node.level is Level.LINE_FUNCTION
    ]
    return {"roots": [build(node_id) for node_id in order_siblings(roots)]}


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    service = DiagService(config or ServiceConfig())
    app = FastAPI(title="fbsdiag", version=__version__, docs_url=None, redoc_url=None)
    app.state.service = service

    @app.exception_handler(DomainError)
    async def on_domain_error(request: Request, exc: DomainError) -> JSONResponse:
        status = _STATUS_BY_CODE.get(exc.code, 422)
        return _error_response(exc.code, str(exc), status)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        return _error_response("bad-request", "malformed request body", 400, exc.errors())

    @app.get("/v1/health")
    async def health() -> dict[str, Any]:
        return _ok({"service": "fbsdiag", "version": __version__})

    @app.get("/v1/graph")
    async def graph_summary() -> dict[str, Any]:
        graph = service.graph
        by_level: dict[str, int] = {level.value: 0 for level in Level}
        for node in graph.system_nodes.values():
            by_level[node.level.value] += 1
        by_kind: dict[str, int] = {kind.value: 0 for kind in EdgeKind}
        for edge in graph.edges:
            by_kind[edge.kind.value] += 1
        return _ok(
            {
                "system_nodes": len(graph.system_nodes),
                "failure_nodes": len(graph.failure_nodes),
                "edges": len(graph.edges),
                "records": len(list_records(graph)),
                "by_level": by_level,
                "by_kind": by_kind,
                "validated": graph.validated,
                "version": service.version,
            }
        )

    @app.get("/v1/graph/tree")
    async def graph_tree() -> dict[str, Any]:
        return _ok(_tree_payload(service.graph))

    @app.get("/v1/records")
    async def records() -> dict[str, Any]:
        rows = [
            {
                "record_id": summary.record_id,
                "failures": summary.failure_count,
                "attach_levels": [level.value for level in summary.attach_levels],
            }
            for summary in list_records(service.graph)
        ]
        return _ok({"records": rows})

    @app.post("/v1/records")
    async def submit_record(body: dict[str, Any]) -> dict[str, Any]:
        return _ok(service.submit_record(body))

    @app.post("/v1/diagnose")
    async def diagnose(body: dict[str, Any]) -> dict[str, Any]:
        level = parse_level(str(body["level"])) if body.get("level") else None
        query = DiagnosisQuery(
            description=str(body.get("description") or ""),
            method=str(body.get("method") or METHOD_PROPOSED),
            n=int(body.get("n") or service.config.retrieval_k),
            level=level,
            attach_hint=str(body["attach_hint"]) if body.get("attach_hint") else None,
        )
        query.check()
        graph, index = service.index_for(query.method, query.level)
        candidates = infer_causes(
            graph,
            index,
            query,
            k=int(body.get("k") or service.config.retrieval_k),
            dedup=bool(body.get("dedup") or False),
        )
        return _ok(
            {
                "method": query.method,
                "level": query.level.value if query.level else None,
                "results": [
                    {
                        "rank": rank + 1,
                        "label": candidate.label,
                        "failure_id": candidate.failure_id,
                        "score": candidate.score,
                        "provenance": list(candidate.provenance),
                    }
                    for rank, candidate in enumerate(candidates)
                ],
            }
        )

    @app.post("/v1/eval")
    async def evaluate(body: dict[str, Any]) -> dict[str, Any]:
        if "suite" not in body:
            raise ParseError("eval body: missing field 'suite'")
        suite = parse_suite(body["suite"])
        methods = body.get("methods") or ["proposed", "baseline"]
        if not isinstance(methods, list):
            raise ParseError("eval body: 'methods' must be a list")
        results = run_ablation(
            service.graph,
            suite,
            [str(method) for method in methods],
            service.config.embedder,
            k=int(body.get("k") or service.config.retrieval_k),
            dedup=bool(body.get("dedup") or False),
        )
        rows = [
            {
                "query": result.query_id,
                "method": result.method,
                "n": slot + 1,
                "precision": result.precision[slot],
                "recall": result.recall[slot],
            }
            for result in results
            for slot in range(result.n_max)
        ]
        return _ok({"results": rows})

    @app.get("/v1/failures/{failure_id}")
    async def failure_detail(failure_id: str) -> dict[str, Any]:
        graph = service.graph
        node = graph.failure_node(failure_id)
        attachment = graph.attachment_of(failure_id)

        def brief(fid: str) -> dict[str, str]:
            other = graph.failure_nodes[fid]
            return {"id": other.id, "label": other.label, "category": other.category}

        return _ok(
            {
                "id": node.id,
                "label": node.label,
                "category": node.category,
                "record_id": node.record_id,
                "description": node.description,
                "attached_to": (
                    {
                        "id": attachment,
                        "label": graph.system_nodes[attachment].label,
                        "level": graph.system_nodes[attachment].level.value,
                    }
                    if attachment
                    else None
                ),
                "causes": [brief(fid) for fid in graph.direct_causes_of(failure_id)],
                "effects": [brief(fid) for fid in graph.effects_of(failure_id)],
            }
        )

    if service.config.static_dir and Path(service.config.static_dir).is_dir():
        app.mount(
            "/", StaticFiles(directory=service.config.static_dir, html=True), name="ui"
        )

    return app
