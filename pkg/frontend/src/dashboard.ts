// Evaluation dashboard. Feed it a results.tsv from `eval run`, or paste a
// suite as JSON to score live over POST /v1/eval; either way it plots the
// precision and recall curves exactly as reported, one line per query and
// method.

import { lineChart, type Series } from "./chart";
import { clear, el } from "./dom";
import type { ViewState } from "./state";
import type { EvalRow } from "./types";

export interface DashboardDeps {
  evalRun(suite: unknown): Promise<{ results: EvalRow[] }>;
  state: ViewState;
}

export interface DashboardHandle {
  load(rows: EvalRow[]): void;
  loadTsv(text: string): void;
  pending: Promise<void> | null;
}

export function parseResultsTsv(text: string): EvalRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty file");
  }
  const header = (lines[0] as string).split("\t");
  const expected = ["query", "method", "n", "precision", "recall"];
  if (expected.some((name, i) => header[i] !== name)) {
    throw new Error(`expected columns ${expected.join(", ")}; got ${header.join(", ")}`);
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split("\t");
    if (parts.length !== 5) {
      throw new Error(`line ${i + 2}: expected 5 columns, got ${parts.length}`);
    }
    const [query, method, n, precision, recall] = parts as [string, string, string, string, string];
    const row: EvalRow = {
      query,
      method,
      n: Number(n),
      precision: Number(precision),
      recall: Number(recall),
    };
    if (!Number.isInteger(row.n) || Number.isNaN(row.precision) || Number.isNaN(row.recall)) {
      throw new Error(`line ${i + 2}: non-numeric n/precision/recall`);
    }
    return row;
  });
}

export function mountDashboard(container: HTMLElement, deps: DashboardDeps): DashboardHandle {
  const errorSlot = el("div", { class: "error-slot" });
  const charts = el("div", { class: "charts" });
  const finals = el("div", { class: "finals" });

  const fileInput = el("input", { type: "file", accept: ".tsv,text/tab-separated-values" });
  fileInput.addEventListener("change", () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    handle.pending = file.text().then(
      (text) => handle.loadTsv(text),
      (error) => showError(String(error)),
    );
  });

  const suiteInput = el("textarea", {
    rows: "3",
    placeholder: '{"queries": [{"id": "q1", "description": "...", "level": "ProcessFunction", "ground_truth": {"items": ["..."]}}]}',
  });
  const runButton = el("button", { type: "button", class: "primary" }, "score on the service");
  runButton.addEventListener("click", () => {
    handle.pending = runSuite();
  });

  container.append(
    el(
      "div",
      { class: "dashboard-inputs" },
      el("label", {}, "results.tsv from an eval run", fileInput),
      el("label", {}, "or a suite as JSON", suiteInput, runButton),
    ),
    errorSlot,
    charts,
    finals,
  );

  const handle: DashboardHandle = {
    load(rows) {
      deps.state.evalRows = rows;
      renderRows(rows);
    },
    loadTsv(text) {
      try {
        handle.load(parseResultsTsv(text));
      } catch (error) {
        showError(`not a results table: ${error instanceof Error ? error.message : error}`);
      }
    },
    pending: null,
  };

  async function runSuite(): Promise<void> {
    clear(errorSlot);
    let suite: unknown;
    try {
      suite = JSON.parse(suiteInput.value);
    } catch {
      showError("suite is not valid JSON");
      return;
    }
    try {
      const { results } = await deps.evalRun(suite);
      handle.load(results);
    } catch (error) {
      showError(String(error));
    }
  }

  function showError(message: string): void {
    clear(errorSlot);
    errorSlot.append(el("p", { class: "error-banner", role: "alert" }, message));
  }

  function renderRows(rows: EvalRow[]): void {
    clear(errorSlot);
    clear(charts);
    clear(finals);
    if (rows.length === 0) {
      showError("the table holds no rows");
      return;
    }

    const byLine = new Map<string, EvalRow[]>();
    for (const row of rows) {
      const key = `${row.query} / ${row.method}`;
      const bucket = byLine.get(key);
      if (bucket) bucket.push(row);
      else byLine.set(key, [row]);
    }

    const mkSeries = (metric: "precision" | "recall"): Series[] =>
      [...byLine.entries()].map(([name, lineRows], i) => ({
        name,
        className: `line-${i % 8} ${lineRows[0]?.method === "baseline" ? "dashed" : ""}`,
        points: lineRows.map((row) => [row.n, row[metric]] as [number, number]),
      }));

    charts.append(
      lineChart({ title: "precision at n", series: mkSeries("precision") }),
      lineChart({ title: "recall at n", series: mkSeries("recall") }),
    );

    const legend = el("ul", { class: "legend" });
    [...byLine.keys()].forEach((name, i) => {
      legend.append(el("li", { class: `line-${i % 8}` }, name));
    });

    const table = el("table", { class: "finals-table" });
    table.append(
      el(
        "tr",
        {},
        el("th", {}, "query"),
        el("th", {}, "method"),
        el("th", {}, "final n"),
        el("th", {}, "precision"),
        el("th", {}, "recall"),
      ),
    );
    for (const [, lineRows] of byLine) {
      const last = lineRows.reduce((a, b) => (b.n > a.n ? b : a));
      table.append(
        el(
          "tr",
          { "data-query": last.query, "data-method": last.method },
          el("td", {}, last.query),
          el("td", {}, last.method),
          el("td", {}, String(last.n)),
          el("td", { class: "mono" }, last.precision.toFixed(6)),
          el("td", { class: "mono" }, last.recall.toFixed(6)),
        ),
      );
    }
    finals.append(legend, table);
  }

  return handle;
}
