"""Command line interface.

Exit codes: 0 on success, 1 on a domain error (bad data, failed
validation, provider trouble), 2 on usage errors. ``--format json``
switches commands that print results to machine-readable output.
"""

from __future__ import annotations

import functools
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import click
import yaml

from fbsdiag import __version__
from fbsdiag.chunking import METHOD_PROPOSED, METHODS, generate_chunks
from fbsdiag.diagnose import DEFAULT_K, DiagnosisQuery, infer_causes
from fbsdiag.embedding import build_index, load_index, make_provider, save_index
from fbsdiag.errors import DomainError
from fbsdiag.evaluation import parse_suite, run_ablation, suite_to_document, write_results
from fbsdiag.ingest import (
    add_maintenance_record,
    build_fbs_model,
    corpus_to_document,
    list_records,
    model_spec_to_document,
    parse_model_spec,
    parse_record_corpus,
)
from fbsdiag.ontology import Level, parse_level
from fbsdiag.store import (
    export_graph_script,
    export_property_graph,
    load_graph,
    save_graph,
)
from fbsdiag.synthetic import gen_synthetic_line, realize

_LEVEL_NAMES = [level.value for level in Level]


def _domain_errors(func: Callable[..., Any]) -> Callable[..., Any]:
    """Map DomainError to exit code 1 with the message on stderr."""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except DomainError as exc:
            click.echo(f"error [{exc.code}]: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _read_yaml(path: str) -> Any:
    try:
        return yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise DomainError(f"{path}: not valid YAML: {exc}", code="parse-error") from exc
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}", code="io-error") from exc


def _dump_yaml(data: Any, path: str) -> None:
    Path(path).write_text(
        yaml.safe_dump(data, sort_keys=False, allow_unicode=True, width=2**16),
        encoding="utf-8",
    )


def _resolve_level(level: str | None, method: str) -> Level | None:
    if method == METHOD_PROPOSED and level is None:
        raise click.UsageError("--level is required when --method is 'proposed'")
    return parse_level(level) if level is not None else None


format_option = click.option(
    "--format",
    "output_format",
    type=click.Choice(["table", "json"]),
    default="table",
    show_default=True,
    help="Output style.",
)


@click.group()
@click.version_option(version=__version__, prog_name="fbsdiag")
def main() -> None:
    """Maintenance knowledge graphs with ranked failure-cause retrieval."""


# -- ingest ----------------------------------------------------------------


@main.group()
def ingest() -> None:
    """Build a graph from a model spec, or replay records onto one."""


@ingest.command("model")
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--source", default="", help="Provenance note stored in the graph.")
@_domain_errors
def ingest_model(spec_file: str, out_path: str, source: str) -> None:
    """Expand SPEC_FILE into a validated graph document."""
    spec = parse_model_spec(_read_yaml(spec_file))
    if source:
        spec.source = source
    graph = build_fbs_model(spec)
    graph.created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    save_graph(graph, out_path)
    click.echo(
        f"wrote {out_path}: {len(graph.system_nodes)} system nodes, "
        f"{len(graph.edges)} edges"
    )


@ingest.command("record")
@click.argument("record_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@_domain_errors
def ingest_record(record_file: str, graph_path: str) -> None:
    """Replay the record(s) in RECORD_FILE onto an existing graph."""
    graph = load_graph(graph_path)
    records = parse_record_corpus(_read_yaml(record_file))
    for rec in records:
        add_maintenance_record(graph, rec)
    save_graph(graph, graph_path)
    click.echo(
        f"added {len(records)} record(s); graph now holds "
        f"{len(graph.failure_nodes)} failure nodes from {len(list_records(graph))} records"
    )


# -- validate --------------------------------------------------------------


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@format_option
@_domain_errors
def validate(graph_path: str, output_format: str) -> None:
    """Check every structural invariant of a graph document."""
    graph = load_graph(graph_path)
    report = graph.validate()
    if output_format == "json":
        click.echo(
            json.dumps(
                {
                    "violations": [
                        {"code": v.code, "message": v.message, "subjects": list(v.subjects)}
                        for v in report.violations
                    ]
                }
            )
        )
    else:
        click.echo(report.summary())
    if not report.ok:  # pragma: no cover - load_graph already rejects these
        sys.exit(1)


# -- chunk / index ---------------------------------------------------------


def _chunks_for(graph_path: str, method: str, level: str | None, ancestors: bool):
    graph = load_graph(graph_path)
    resolved = _resolve_level(level, method)
    return graph, generate_chunks(
        graph, method, resolved, include_ancestor_path=ancestors
    )


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(list(METHODS)), required=True)
@click.option("--level", type=click.Choice(_LEVEL_NAMES))
@click.option("--ancestors", is_flag=True, help="Include HasPart ancestors of member systems.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write YAML here instead of stdout.")
@_domain_errors
def chunk(graph_path: str, method: str, level: str | None, ancestors: bool, out_path: str | None) -> None:
    """Generate retrieval chunks and print or save them."""
    _, chunks = _chunks_for(graph_path, method, level, ancestors)
    doc = {
        "chunks": [
            {
                "chunk_id": c.chunk_id,
                "method": c.method,
                "level": c.level.value if c.level else None,
                "anchor_failure_id": c.anchor_failure_id,
                "member_failure_ids": list(c.member_failure_ids),
                "member_system_ids": list(c.member_system_ids),
                "text": c.text,
            }
            for c in chunks
        ]
    }
    if out_path:
        _dump_yaml(doc, out_path)
        click.echo(f"wrote {len(chunks)} chunk(s) to {out_path}")
    else:
        click.echo(yaml.safe_dump(doc, sort_keys=False, allow_unicode=True, width=2**16), nl=False)


def _provider_config(
    provider: str, endpoint: str, model: str, key_env: str, dimension: int, concurrency: int
) -> dict[str, Any]:
    config: dict[str, Any] = {"kind": provider}
    if endpoint:
        config["endpoint"] = endpoint
    if model:
        config["model"] = model
    if key_env:
        config["key_env"] = key_env
    if dimension:
        config["dimension"] = dimension
    if concurrency:
        config["concurrency"] = concurrency
    return config


provider_options = [
    click.option("--provider", type=click.Choice(["local", "remote"]), default="local", show_default=True),
    click.option("--endpoint", default="", help="Remote embeddings URL."),
    click.option("--model", default="", help="Remote model name."),
    click.option("--key-env", default="", help="Environment variable holding the API key."),
    click.option("--dimension", type=int, default=0, help="Vector width (0 = provider default)."),
    click.option("--concurrency", type=int, default=0, help="Parallel remote requests."),
]


def _with_provider_options(func: Callable[..., Any]) -> Callable[..., Any]:
    for option in reversed(provider_options):
        func = option(func)
    return func


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--method", type=click.Choice(list(METHODS)), required=True)
@click.option("--level", type=click.Choice(_LEVEL_NAMES))
@click.option("--ancestors", is_flag=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_with_provider_options
@_domain_errors
def index(
    graph_path: str,
    method: str,
    level: str | None,
    ancestors: bool,
    out_path: str,
    provider: str,
    endpoint: str,
    model: str,
    key_env: str,
    dimension: int,
    concurrency: int,
) -> None:
    """Embed the chunks of a graph and persist the vector index."""
    _, chunks = _chunks_for(graph_path, method, level, ancestors)
    embedder = make_provider(
        _provider_config(provider, endpoint, model, key_env, dimension, concurrency)
    )
    vector_index = build_index(chunks, embedder)
    save_index(vector_index, out_path)
    click.echo(f"indexed {len(vector_index)} chunk(s) to {out_path}")


# -- diagnose --------------------------------------------------------------


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--text", required=True, help="Symptom description to diagnose.")
@click.option("--method", type=click.Choice(list(METHODS)), default=METHOD_PROPOSED, show_default=True)
@click.option("--level", type=click.Choice(_LEVEL_NAMES))
@click.option("--n", type=int, default=DEFAULT_K, show_default=True, help="Candidates to return.")
@click.option("--k", type=int, default=DEFAULT_K, show_default=True, help="Chunks to retrieve.")
@click.option("--attach-hint", default="", help="Restrict to this system subtree.")
@click.option("--dedup", is_flag=True, help="Collapse repeated labels.")
@click.option("--ancestors", is_flag=True)
@click.option("--index", "index_path", type=click.Path(exists=True, dir_okay=False), help="Reuse a persisted index.")
@format_option
@_with_provider_options
@_domain_errors
def diagnose(
    graph_path: str,
    text: str,
    method: str,
    level: str | None,
    n: int,
    k: int,
    attach_hint: str,
    dedup: bool,
    ancestors: bool,
    index_path: str | None,
    output_format: str,
    provider: str,
    endpoint: str,
    model: str,
    key_env: str,
    dimension: int,
    concurrency: int,
) -> None:
    """Rank likely failure causes for a described symptom."""
    graph, chunks = _chunks_for(graph_path, method, level, ancestors)
    if index_path:
        vector_index = load_index(index_path)
        vector_index.bind_chunks(chunks)
    else:
        embedder = make_provider(
            _provider_config(provider, endpoint, model, key_env, dimension, concurrency)
        )
        vector_index = build_index(chunks, embedder)
    query = DiagnosisQuery(
        description=text,
        method=method,
        n=n,
        level=_resolve_level(level, method),
        attach_hint=attach_hint or None,
    )
    candidates = infer_causes(graph, vector_index, query, k=k, dedup=dedup)
    if output_format == "json":
        click.echo(
            json.dumps(
                {
                    "results": [
                        {
                            "rank": rank + 1,
                            "label": c.label,
                            "failure_id": c.failure_id,
                            "score": c.score,
                            "provenance": list(c.provenance),
                        }
                        for rank, c in enumerate(candidates)
                    ]
                }
            )
        )
        return
    if not candidates:
        click.echo("no candidates")
        return
    width = max(len(c.label) for c in candidates)
    for rank, c in enumerate(candidates, start=1):
        click.echo(
            f"{rank:>3}  {c.label:<{width}}  {c.score:8.4f}  {', '.join(c.provenance)}"
        )


# -- eval ------------------------------------------------------------------


@main.group("eval")
def eval_group() -> None:
    """Ablation runs and synthetic benchmark generation."""


@eval_group.command("run")
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--suite", "suite_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--methods", default="proposed,baseline", show_default=True, help="Comma-separated.")
@click.option("--k", type=int, default=DEFAULT_K, show_default=True)
@click.option("--dedup", is_flag=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_with_provider_options
@_domain_errors
def eval_run(
    graph_path: str,
    suite_path: str,
    methods: str,
    k: int,
    dedup: bool,
    out_dir: str,
    provider: str,
    endpoint: str,
    model: str,
    key_env: str,
    dimension: int,
    concurrency: int,
) -> None:
    """Score a suite under each method; write results.tsv and summary.txt."""
    graph = load_graph(graph_path)
    suite = parse_suite(_read_yaml(suite_path))
    method_list = [m.strip() for m in methods.split(",") if m.strip()]
    results = run_ablation(
        graph,
        suite,
        method_list,
        _provider_config(provider, endpoint, model, key_env, dimension, concurrency),
        k=k,
        dedup=dedup,
        out_dir=out_dir,
    )
    click.echo(f"wrote {Path(out_dir) / 'results.tsv'}")
    for method in sorted({r.method for r in results}):
        rows = [r for r in results if r.method == method]
        mean_p = sum(r.precision[-1] for r in rows) / len(rows)
        mean_r = sum(r.recall[-1] for r in rows) / len(rows)
        click.echo(f"{method:>9}: mean P@N {mean_p:.3f}  mean R@N {mean_r:.3f}")


@eval_group.command("synth")
@click.option("--processes", type=int, default=6, show_default=True)
@click.option("--elements", type=int, default=4, show_default=True)
@click.option("--records", type=int, default=18, show_default=True)
@click.option("--drift", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_domain_errors
def eval_synth(
    processes: int, elements: int, records: int, drift: float, seed: int, out_dir: str
) -> None:
    """Generate a drift benchmark: model, records, suite and built graph."""
    dataset = gen_synthetic_line(processes, elements, records, drift, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump_yaml(model_spec_to_document(dataset.model_spec), str(out / "model.yaml"))
    _dump_yaml(corpus_to_document(dataset.records), str(out / "records.yaml"))
    _dump_yaml(suite_to_document(dataset.suite), str(out / "suite.yaml"))
    graph = realize(dataset)
    save_graph(graph, out / "graph.dkg")
    click.echo(
        f"wrote {out}: {len(dataset.records)} records, "
        f"{len(dataset.suite.queries)} queries, graph with "
        f"{len(graph.system_nodes)} system and {len(graph.failure_nodes)} failure nodes"
    )


# -- export / serve --------------------------------------------------------


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--script/--no-script", default=True, show_default=True, help="Also write graph.cypher.")
@_domain_errors
def export(graph_path: str, out_dir: str, script: bool) -> None:
    """Write nodes.csv / relationships.csv (and a Cypher script)."""
    graph = load_graph(graph_path)
    nodes_path, rels_path = export_property_graph(graph, out_dir)
    click.echo(f"wrote {nodes_path} and {rels_path}")
    if script:
        script_path = export_graph_script(graph, Path(out_dir) / "graph.cypher")
        click.echo(f"wrote {script_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_path", type=click.Path(dir_okay=False))
@click.option("--host", default="")
@click.option("--port", type=int, default=0)
@click.option("--static-dir", default="", help="Directory with the web UI build.")
@_domain_errors
def serve(
    config_path: str | None, graph_path: str | None, host: str, port: int, static_dir: str
) -> None:
    """Run the HTTP service."""
    import uvicorn

    from fbsdiag.service import create_app, load_config

    overrides: dict[str, Any] = {}
    if graph_path:
        overrides["graph_path"] = graph_path
    if host:
        overrides["host"] = host
    if port:
        overrides["port"] = port
    if static_dir:
        overrides["static_dir"] = static_dir
    config = load_config(config_path, overrides)
    app = create_app(config)
    click.echo(f"serving on {config.host}:{config.port}")
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
