// The diagnosis console. A query form on top; below it one ranked panel
// per method, side by side when both are requested. Every number shown
// comes straight out of the service response.

import { clear, el, fmtScore } from "./dom";
import type { ViewState } from "./state";
import { today, verifiedDraft } from "./state";
import type {
  DiagnoseRequest,
  DiagnoseResult,
  FailureDetail,
  LevelName,
  RankedCause,
  RecordDraft,
} from "./types";
import { LEVELS } from "./types";
import { failureCard } from "./tree";

export interface ConsoleDeps {
  diagnose(request: DiagnoseRequest): Promise<DiagnoseResult>;
  fetchFailure(id: string): Promise<FailureDetail>;
  state: ViewState;
  onVerified(draft: RecordDraft): void;
}

export interface ConsoleHandle {
  run(): Promise<void>;
  pending: Promise<void> | null;
}

const MODE_PROPOSED = "proposed";
const MODE_BASELINE = "baseline";
const MODE_BOTH = "both";

export function mountConsole(container: HTMLElement, deps: ConsoleDeps): ConsoleHandle {
  const description = el("textarea", {
    class: "query-text",
    rows: "2",
    placeholder: "describe the symptom, e.g. roof slips inside the chuck during transfer",
  });
  const levelSelect = el("select", { class: "query-level" });
  for (const level of LEVELS) {
    levelSelect.append(el("option", { value: level }, level));
  }
  levelSelect.value = deps.state.query.level;

  const nSlider = el("input", {
    class: "query-n",
    type: "range",
    min: "1",
    max: "20",
    value: String(deps.state.query.n),
  });
  const nReadout = el("output", {}, String(deps.state.query.n));
  nSlider.addEventListener("input", () => {
    nReadout.textContent = nSlider.value;
  });

  const modeSelect = el("select", { class: "query-mode" });
  modeSelect.append(
    el("option", { value: MODE_PROPOSED }, "hierarchy chunks"),
    el("option", { value: MODE_BASELINE }, "per-record baseline"),
    el("option", { value: MODE_BOTH }, "both, side by side"),
  );

  const runButton = el("button", { class: "primary", type: "button" }, "diagnose");
  const errorSlot = el("div", { class: "error-slot" });
  const panels = el("div", { class: "result-panels" });
  const drilldown = el("div", { class: "drilldown" });

  container.append(
    el(
      "div",
      { class: "query-form" },
      el("label", {}, "symptom", description),
      el(
        "div",
        { class: "query-knobs" },
        el("label", {}, "level", levelSelect),
        el("label", {}, "candidates", nSlider, nReadout),
        el("label", {}, "method", modeSelect),
        runButton,
      ),
    ),
    errorSlot,
    panels,
    drilldown,
  );

  const handle: ConsoleHandle = {
    run,
    pending: null,
  };
  runButton.addEventListener("click", () => {
    handle.pending = run();
  });

  async function run(): Promise<void> {
    const state = deps.state;
    state.query.description = description.value;
    state.query.level = levelSelect.value as LevelName;
    state.query.n = Number(nSlider.value);
    state.query.sideBySide = modeSelect.value === MODE_BOTH;

    clear(errorSlot);
    clear(panels);
    clear(drilldown);

    const methods =
      modeSelect.value === MODE_BOTH ? [MODE_PROPOSED, MODE_BASELINE] : [modeSelect.value];
    try {
      const settled = await Promise.all(methods.map((method) => deps.diagnose(request(method))));
      methods.forEach((method, i) => {
        const result = settled[i];
        if (!result) return;
        if (method === MODE_PROPOSED) state.results.proposed = result;
        else state.results.baseline = result;
        panels.append(resultPanel(result));
      });
    } catch (error) {
      errorSlot.append(
        el("p", { class: "error-banner", role: "alert" }, describeError(error)),
      );
    }
  }

  function request(method: string): DiagnoseRequest {
    const body: DiagnoseRequest = {
      description: description.value,
      method,
      n: Number(nSlider.value),
    };
    // the baseline chunks per record and ignores the hierarchy
    if (method === MODE_PROPOSED) {
      body.level = levelSelect.value as LevelName;
    }
    return body;
  }

  function resultPanel(result: DiagnoseResult): HTMLElement {
    const table = el("table", { class: "ranked" });
    table.append(
      el(
        "tr",
        {},
        el("th", {}, "#"),
        el("th", {}, "candidate cause"),
        el("th", {}, "score"),
        el("th", {}, "from"),
        el("th", {}, ""),
      ),
    );
    for (const row of result.results) {
      table.append(causeRow(row));
    }
    if (result.results.length === 0) {
      table.append(el("tr", {}, el("td", { colspan: "5" }, "no candidates")));
    }
    return el(
      "section",
      { class: "result-panel", "data-method": result.method },
      el("h3", {}, result.method, result.level ? ` @ ${result.level}` : ""),
      table,
    );
  }

  function causeRow(row: RankedCause): HTMLElement {
    const label = el("button", { class: "link", type: "button" }, row.label);
    label.addEventListener("click", () => {
      handle.pending = drillInto(row.failure_id);
    });
    const chips = el("span", { class: "provenance" });
    for (const chunkId of row.provenance) {
      chips.append(provenanceChip(chunkId));
    }
    const verify = el("button", { class: "secondary", type: "button" }, "mark verified");
    verify.addEventListener("click", () => {
      handle.pending = markVerified(row);
    });
    return el(
      "tr",
      {
        class: "cause-row",
        "data-rank": String(row.rank),
        "data-failure-id": row.failure_id,
        "data-label": row.label,
        "data-score": String(row.score),
      },
      el("td", {}, String(row.rank)),
      el("td", {}, label),
      el("td", { class: "mono" }, fmtScore(row.score)),
      el("td", {}, chips),
      el("td", {}, verify),
    );
  }

  function provenanceChip(chunkId: string): HTMLElement {
    const chip = el(
      "button",
      { class: "chip", type: "button", "data-chunk-id": chunkId, title: chunkId },
      shortChunkId(chunkId),
    );
    chip.addEventListener("click", () => {
      const anchor = anchorOfChunk(chunkId);
      if (anchor) {
        handle.pending = drillInto(anchor);
      } else {
        clear(drilldown);
        drilldown.append(
          el(
            "p",
            { class: "muted" },
            `chunk ${chunkId}: one chunk per record, grouping every failure of ${
              chunkId.split(":", 2)[1] ?? chunkId
            }`,
          ),
        );
      }
    });
    return chip;
  }

  async function drillInto(failureId: string): Promise<void> {
    clear(drilldown);
    try {
      const detail = await deps.fetchFailure(failureId);
      drilldown.append(failureCard(detail));
    } catch (error) {
      drilldown.append(el("p", { class: "error-banner" }, describeError(error)));
    }
  }

  async function markVerified(row: RankedCause): Promise<void> {
    try {
      const detail = await deps.fetchFailure(row.failure_id);
      deps.onVerified(verifiedDraft(description.value, detail, today()));
    } catch (error) {
      clear(errorSlot);
      errorSlot.append(el("p", { class: "error-banner" }, describeError(error)));
    }
  }

  return handle;
}

/**
 * Proposed chunk ids read `proposed:<level>:<anchor failure id>`; the anchor's
 * detail is the chunk's context. Baseline ids carry only a record id.
 */
export function anchorOfChunk(chunkId: string): string | null {
  if (!chunkId.startsWith("proposed:")) return null;
  const rest = chunkId.slice("proposed:".length);
  const cut = rest.indexOf(":");
  return cut < 0 ? null : rest.slice(cut + 1);
}

function shortChunkId(chunkId: string): string {
  const anchor = anchorOfChunk(chunkId);
  return anchor ?? chunkId;
}

function describeError(error: unknown): string {
  if (error instanceof Error && "code" in error) {
    return `${(error as { code: string }).code}: ${error.message}`;
  }
  return String(error);
}
