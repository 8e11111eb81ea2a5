"""Regenerate the canned service responses under frontend/tests/fixtures/.

The console's ranked-list test replays a diagnosis against a canned
service response and expects the exact rows the CLI printed. This script
runs the same query through both surfaces against the bundled graph,
refuses to write anything if they disagree, and freezes the HTTP
envelopes plus the agreed rows (parity.json). It also snapshots the
tree, summary, and one failure detail so the widget tests exercise real
payload shapes instead of hand-typed ones.

    python tools/make_parity_fixture.py
"""

from __future__ import annotations

import json
from pathlib import Path

from click.testing import CliRunner
from fastapi.testclient import TestClient

from fbsdiag.bundled import example_graph_path
from fbsdiag.cli import main
from fbsdiag.service import ServiceConfig, create_app

FIXTURES = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"

DESCRIPTION = "roof slips inside the chuck during transfer to the car body"
LEVEL = "ProcessElementFunction"
N = 10


def cli_rows(method: str) -> list[dict]:
    args = [
        "diagnose",
        "--graph", str(example_graph_path()),
        "--text", DESCRIPTION,
        "--method", method,
        "--n", str(N),
        "--format", "json",
    ]
    if method == "proposed":
        args += ["--level", LEVEL]
    result = CliRunner().invoke(main, args)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)["results"]


def http_envelope(client: TestClient, method: str) -> dict:
    body = {"description": DESCRIPTION, "method": method, "n": N}
    if method == "proposed":
        body["level"] = LEVEL
    response = client.post("/v1/diagnose", json=body)
    assert response.status_code == 200, response.text
    return response.json()


def dump(name: str, payload: dict) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def main_() -> None:
    app = create_app(ServiceConfig(graph_path=str(example_graph_path())))
    fixture: dict = {
        "query": {"description": DESCRIPTION, "level": LEVEL, "n": N},
        "methods": {},
    }
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with TestClient(app) as client:
        for method in ("proposed", "baseline"):
            from_cli = cli_rows(method)
            envelope = http_envelope(client, method)
            from_http = envelope["payload"]["results"]
            assert from_cli == from_http, f"{method}: CLI and HTTP rows disagree"
            assert len(from_cli) == N
            fixture["methods"][method] = {"envelope": envelope, "rows": from_cli}
        dump("parity.json", fixture)
        print(f"  {', '.join(fixture['methods'])} agree on {N} rows")

        dump("tree.json", client.get("/v1/graph/tree").json())
        dump("graph.json", client.get("/v1/graph").json())
        top = fixture["methods"]["proposed"]["rows"][0]["failure_id"]
        dump("failure.json", client.get(f"/v1/failures/{top}").json())


if __name__ == "__main__":
    main_()
