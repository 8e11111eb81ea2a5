"""End-to-end command line flows."""

from __future__ import annotations

import json

import pytest
import yaml
from click.testing import CliRunner

from fbsdiag import __version__
from fbsdiag.cli import main
from fbsdiag.ingest import parse_model_spec
from fbsdiag.evaluation import parse_suite, suite_to_document
from fbsdiag.store import graph_to_document, load_graph, save_graph
from test_diagnose import wide_plant
from test_evaluation import small_suite

MODEL_SPEC = """\
roots:
- label: assembly line
  level: LineFunction
  children:
  - label: assemble roof
    children:
    - label: chuck the roof
      children:
      - label: jaw motion
        children:
        - label: chuck unit
"""

RECORDS = """\
records:
- record_id: mr-1
  failures:
  - key: f1
    label: roof slips sideways
    category: accuracy
    attach: assembly-line/assemble-roof
  - key: f2
    label: chuck jaw worn
    category: wear
    attach: assembly-line/assemble-roof/chuck-the-roof
  - key: f3
    label: jaw spring fatigued
    category: wear
    attach: assembly-line/assemble-roof/chuck-the-roof/jaw-motion
  causes:
  - effect: f1
    cause: f2
  - effect: f2
    cause: f3
"""


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def ingested(tmp_path, runner):
    """A graph file built from the spec above with one record replayed."""
    spec = tmp_path / "model.yaml"
    spec.write_text(MODEL_SPEC, encoding="utf-8")
    graph_path = tmp_path / "line.dkg"
    result = runner.invoke(main, ["ingest", "model", str(spec), "--out", str(graph_path)])
    assert result.exit_code == 0, result.output

    records = tmp_path / "records.yaml"
    records.write_text(RECORDS, encoding="utf-8")
    result = runner.invoke(
        main, ["ingest", "record", str(records), "--graph", str(graph_path)]
    )
    assert result.exit_code == 0, result.output
    return graph_path


def test_version_flag(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert f"fbsdiag, version {__version__}" in result.output


def test_ingest_model_reports_counts(tmp_path, runner):
    spec = tmp_path / "model.yaml"
    spec.write_text(MODEL_SPEC, encoding="utf-8")
    out = tmp_path / "line.dkg"
    result = runner.invoke(main, ["ingest", "model", str(spec), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "5 system nodes" in result.output
    assert "4 edges" in result.output
    graph = load_graph(out)
    assert "assembly-line/assemble-roof" in graph.system_nodes


def test_ingest_record_extends_the_graph(ingested):
    graph = load_graph(ingested)
    assert len(graph.failure_nodes) == 3
    assert "mr-1:f2" in graph.failure_nodes


def test_ingest_rejects_a_bad_record(tmp_path, runner, ingested):
    bad = tmp_path / "bad.yaml"
    bad.write_text(
        "record_id: mr-2\n"
        "failures:\n"
        "- key: f1\n  label: x\n  category: accuracy\n  attach: nonesuch\n",
        encoding="utf-8",
    )
    result = runner.invoke(main, ["ingest", "record", str(bad), "--graph", str(ingested)])
    assert result.exit_code == 1
    assert "error [unknown-attach]:" in result.output
    assert len(load_graph(ingested).failure_nodes) == 3  # untouched


def test_validate_clean_graph(runner, ingested):
    result = runner.invoke(main, ["validate", "--graph", str(ingested)])
    assert result.exit_code == 0
    assert "0 violations" in result.output
    as_json = runner.invoke(
        main, ["validate", "--graph", str(ingested), "--format", "json"]
    )
    assert json.loads(as_json.output) == {"violations": []}


def test_validate_rejects_a_corrupted_file(tmp_path, runner):
    g = wide_plant()
    doc = graph_to_document(g)
    doc["edges"].append({"kind": "HasPart", "src": "line", "dst": "gone-missing"})
    path = tmp_path / "broken.dkg"
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    result = runner.invoke(main, ["validate", "--graph", str(path)])
    assert result.exit_code == 1
    assert "error [validation-error]:" in result.output
    assert "gone-missing" in result.output


def test_chunk_prints_yaml(runner, ingested):
    result = runner.invoke(
        main,
        ["chunk", "--graph", str(ingested), "--method", "proposed", "--level", "ProcessFunction"],
    )
    assert result.exit_code == 0, result.output
    doc = yaml.safe_load(result.output)
    assert len(doc["chunks"]) == 1
    chunk = doc["chunks"][0]
    assert chunk["anchor_failure_id"] == "mr-1:f1"
    assert chunk["member_failure_ids"] == ["mr-1:f1", "mr-1:f2", "mr-1:f3"]
    assert "roof slips sideways" in chunk["text"]


def test_chunk_requires_a_level_for_proposed(runner, ingested):
    result = runner.invoke(main, ["chunk", "--graph", str(ingested), "--method", "proposed"])
    assert result.exit_code == 2
    assert "--level is required" in result.output


def test_chunk_writes_a_file(tmp_path, runner, ingested):
    out = tmp_path / "chunks.yaml"
    result = runner.invoke(
        main,
        ["chunk", "--graph", str(ingested), "--method", "baseline", "--out", str(out)],
    )
    assert result.exit_code == 0
    assert "wrote 1 chunk(s)" in result.output
    doc = yaml.safe_load(out.read_text(encoding="utf-8"))
    assert doc["chunks"][0]["chunk_id"] == "baseline:mr-1"


def test_index_then_diagnose_reuses_the_persisted_index(tmp_path, runner, ingested):
    idx = tmp_path / "idx.yaml"
    result = runner.invoke(
        main,
        [
            "index", "--graph", str(ingested), "--method", "proposed",
            "--level", "ProcessFunction", "--out", str(idx),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "indexed 1 chunk(s)" in result.output

    args = [
        "diagnose", "--graph", str(ingested), "--text", "roof slips sideways",
        "--method", "proposed", "--level", "ProcessFunction", "--format", "json",
    ]
    fresh = runner.invoke(main, args)
    assert fresh.exit_code == 0, fresh.output
    reused = runner.invoke(main, args + ["--index", str(idx)])
    assert reused.exit_code == 0, reused.output
    # persisted vectors round-trip through decimal text, so scores may move
    # by ~1e-9; the ranking itself must not
    fresh_rows = json.loads(fresh.output)["results"]
    reused_rows = json.loads(reused.output)["results"]
    key = lambda row: (row["rank"], row["label"], row["failure_id"])
    assert [key(r) for r in fresh_rows] == [key(r) for r in reused_rows]
    for a, b in zip(fresh_rows, reused_rows):
        assert a["score"] == pytest.approx(b["score"], abs=1e-6)

    rows = json.loads(fresh.output)["results"]
    assert [row["rank"] for row in rows] == [1, 2]
    assert rows[0]["label"] == "chuck jaw worn"
    assert rows[1]["label"] == "jaw spring fatigued"


def test_diagnose_table_output(runner, ingested):
    result = runner.invoke(
        main,
        [
            "diagnose", "--graph", str(ingested), "--text", "roof slips sideways",
            "--method", "proposed", "--level", "ProcessFunction", "--n", "1",
        ],
    )
    assert result.exit_code == 0, result.output
    lines = [line for line in result.output.splitlines() if line]
    assert len(lines) == 1
    assert lines[0].startswith("  1  chuck jaw worn")


def test_diagnose_usage_errors(runner, ingested):
    result = runner.invoke(
        main, ["diagnose", "--graph", str(ingested), "--text", "x", "--method", "proposed"]
    )
    assert result.exit_code == 2
    assert "--level is required" in result.output
    result = runner.invoke(
        main, ["diagnose", "--graph", str(ingested), "--text", "x", "--method", "magic"]
    )
    assert result.exit_code == 2


def test_diagnose_rejects_a_stale_index(tmp_path, runner, ingested):
    idx = tmp_path / "idx.yaml"
    runner.invoke(
        main,
        ["index", "--graph", str(ingested), "--method", "baseline", "--out", str(idx)],
    )
    result = runner.invoke(
        main,
        [
            "diagnose", "--graph", str(ingested), "--text", "x", "--method", "proposed",
            "--level", "Behavior", "--index", str(idx),
        ],
    )
    assert result.exit_code == 1
    assert "error [index-mismatch]:" in result.output


def test_diagnose_on_an_empty_graph_fails_cleanly(tmp_path, runner):
    spec = tmp_path / "model.yaml"
    spec.write_text(MODEL_SPEC, encoding="utf-8")
    graph_path = tmp_path / "bare.dkg"
    runner.invoke(main, ["ingest", "model", str(spec), "--out", str(graph_path)])
    result = runner.invoke(
        main,
        ["diagnose", "--graph", str(graph_path), "--text", "x", "--method", "baseline"],
    )
    assert result.exit_code == 1
    assert "error [empty-index]:" in result.output


# -- eval ------------------------------------------------------------------


@pytest.fixture()
def eval_inputs(tmp_path):
    graph_path = tmp_path / "plant.dkg"
    save_graph(wide_plant(), graph_path)
    suite_path = tmp_path / "suite.yaml"
    suite_path.write_text(
        yaml.safe_dump(suite_to_document(small_suite())), encoding="utf-8"
    )
    return graph_path, suite_path


def test_eval_run_writes_reports(tmp_path, runner, eval_inputs):
    graph_path, suite_path = eval_inputs
    out_dir = tmp_path / "out"
    result = runner.invoke(
        main,
        [
            "eval", "run", "--graph", str(graph_path), "--suite", str(suite_path),
            "--out", str(out_dir),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "mean P@N" in result.output

    table = (out_dir / "results.tsv").read_text(encoding="utf-8").splitlines()
    assert table[0] == "query\tmethod\tn\tprecision\trecall"
    assert len(table) == 1 + (1 + 2) * 2  # truth sizes 1 and 2, two methods
    assert (out_dir / "curves.tsv").exists()
    assert (out_dir / "summary.txt").read_text(encoding="utf-8").startswith(
        "ablation summary"
    )


def test_eval_run_honors_the_method_list(tmp_path, runner, eval_inputs):
    graph_path, suite_path = eval_inputs
    out_dir = tmp_path / "out"
    result = runner.invoke(
        main,
        [
            "eval", "run", "--graph", str(graph_path), "--suite", str(suite_path),
            "--methods", "baseline", "--out", str(out_dir),
        ],
    )
    assert result.exit_code == 0, result.output
    rows = (out_dir / "results.tsv").read_text(encoding="utf-8").splitlines()[1:]
    assert rows
    assert all(row.split("\t")[1] == "baseline" for row in rows)


def test_eval_run_twice_is_byte_identical(tmp_path, runner, eval_inputs):
    graph_path, suite_path = eval_inputs
    for name in ("one", "two"):
        result = runner.invoke(
            main,
            [
                "eval", "run", "--graph", str(graph_path), "--suite", str(suite_path),
                "--out", str(tmp_path / name),
            ],
        )
        assert result.exit_code == 0, result.output
    assert (tmp_path / "one" / "results.tsv").read_bytes() == (
        tmp_path / "two" / "results.tsv"
    ).read_bytes()


def test_eval_synth_writes_the_benchmark_bundle(tmp_path, runner):
    out_dir = tmp_path / "bench"
    result = runner.invoke(
        main,
        [
            "eval", "synth", "--processes", "2", "--elements", "2", "--records", "4",
            "--drift", "0.5", "--seed", "3", "--out", str(out_dir),
        ],
    )
    assert result.exit_code == 0, result.output
    for name in ("model.yaml", "records.yaml", "suite.yaml", "graph.dkg"):
        assert (out_dir / name).exists()

    spec = parse_model_spec(yaml.safe_load((out_dir / "model.yaml").read_text("utf-8")))
    assert len(spec.roots) == 1
    suite = parse_suite(yaml.safe_load((out_dir / "suite.yaml").read_text("utf-8")))
    assert suite.queries
    graph = load_graph(out_dir / "graph.dkg")
    assert len(graph.system_nodes) == 1 + 2 + 2 * (3 * 2)


def test_eval_synth_validates_parameters(tmp_path, runner):
    result = runner.invoke(
        main, ["eval", "synth", "--processes", "0", "--out", str(tmp_path / "x")]
    )
    assert result.exit_code == 1
    assert "error [bad-params]:" in result.output


# -- export ----------------------------------------------------------------


def test_export_writes_csv_and_script(tmp_path, runner, ingested):
    out_dir = tmp_path / "exported"
    result = runner.invoke(main, ["export", "--graph", str(ingested), "--out-dir", str(out_dir)])
    assert result.exit_code == 0, result.output
    assert (out_dir / "nodes.csv").exists()
    assert (out_dir / "relationships.csv").exists()
    assert (out_dir / "graph.cypher").exists()


def test_export_can_skip_the_script(tmp_path, runner, ingested):
    out_dir = tmp_path / "exported"
    result = runner.invoke(
        main,
        ["export", "--graph", str(ingested), "--out-dir", str(out_dir), "--no-script"],
    )
    assert result.exit_code == 0, result.output
    assert not (out_dir / "graph.cypher").exists()
