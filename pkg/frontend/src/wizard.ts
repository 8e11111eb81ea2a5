// Record entry in three steps: describe the observed failures, link the
// cause chain, review and submit. The draft is checked against the same
// rules the service applies before anything is sent, and the one write
// path out of here is POST /v1/records.

import { clear, el } from "./dom";
import { validateDraft, type Violation } from "./rules";
import type { ViewState } from "./state";
import { emptyDraft, nextKey } from "./state";
import type { DraftCause, RecordDraft, SubmitAck, TreeNode } from "./types";
import { LEVELS } from "./types";

export interface WizardDeps {
  submit(draft: RecordDraft): Promise<SubmitAck>;
  state: ViewState;
  onSubmitted(ack: SubmitAck): void;
}

export interface WizardHandle {
  setSystems(roots: TreeNode[]): void;
  setDraft(draft: RecordDraft): void;
  render(): void;
  pending: Promise<void> | null;
}

interface SystemOption {
  id: string;
  label: string;
  level: string;
}

const CATEGORY_HINTS = ["motion", "mechanism_structure", "accuracy"];

export function mountWizard(container: HTMLElement, deps: WizardDeps): WizardHandle {
  let systems: SystemOption[] = [];
  let systemIds = new Set<string>();
  let step = 0;
  let violations: Violation[] = [];
  let linking: string | null = null;
  let notice: HTMLElement | null = null;

  const steps = ["failures", "cause links", "review & submit"];

  const handle: WizardHandle = {
    setSystems(roots) {
      systems = flatten(roots);
      systemIds = new Set(systems.map((system) => system.id));
      render();
    },
    setDraft(draft) {
      deps.state.draft = draft;
      step = 0;
      violations = [];
      notice = null;
      render();
    },
    render,
    pending: null,
  };

  function draft(): RecordDraft {
    return deps.state.draft;
  }

  function flagged(field: string): Violation | undefined {
    return violations.find((violation) => violation.field === field);
  }

  function fieldSlot(field: string): HTMLElement {
    const violation = flagged(field);
    return el(
      "span",
      { class: "field-error", "data-field": field },
      violation ? `${violation.code}: ${violation.message}` : "",
    );
  }

  function render(): void {
    clear(container);
    const nav = el("nav", { class: "wizard-steps" });
    steps.forEach((name, i) => {
      const button = el(
        "button",
        { type: "button", class: i === step ? "step active" : "step" },
        `${i + 1}. ${name}`,
      );
      button.addEventListener("click", () => {
        step = i;
        render();
      });
      nav.append(button);
    });
    container.append(nav);
    if (notice) container.append(notice);
    if (step === 0) renderFailures();
    else if (step === 1) renderLinks();
    else renderReview();
  }

  function renderFailures(): void {
    const body = el("div", { class: "wizard-body" });
    const idInput = el("input", {
      "data-field": "record_id",
      placeholder: "e.g. mr-0169",
      value: draft().record_id,
    });
    idInput.addEventListener("input", () => {
      draft().record_id = idInput.value;
    });
    const authorInput = el("input", { placeholder: "author", value: draft().author });
    authorInput.addEventListener("input", () => {
      draft().author = authorInput.value;
    });
    const dateInput = el("input", { type: "date", value: draft().date });
    dateInput.addEventListener("input", () => {
      draft().date = dateInput.value;
    });
    body.append(
      el(
        "div",
        { class: "wizard-head" },
        el("label", {}, "record id", idInput, fieldSlot("record_id")),
        el("label", {}, "author", authorInput),
        el("label", {}, "date", dateInput),
      ),
    );

    const datalist = el("datalist", { id: "category-hints" });
    for (const hint of CATEGORY_HINTS) datalist.append(el("option", { value: hint }));
    body.append(datalist);

    draft().failures.forEach((failure, i) => {
      const at = `failures[${i}]`;
      const labelInput = el("input", {
        "data-field": `${at}.label`,
        placeholder: "what went wrong",
        value: failure.label,
      });
      labelInput.addEventListener("input", () => {
        failure.label = labelInput.value;
      });
      const categoryInput = el("input", {
        "data-field": `${at}.category`,
        list: "category-hints",
        placeholder: "category",
        value: failure.category,
      });
      categoryInput.addEventListener("input", () => {
        failure.category = categoryInput.value;
      });
      const attachSelect = attachPicker(at, failure.attach, (value) => {
        failure.attach = value;
      });
      const descriptionInput = el("input", {
        placeholder: "notes (optional)",
        value: failure.description,
      });
      descriptionInput.addEventListener("input", () => {
        failure.description = descriptionInput.value;
      });
      const remove = el("button", { type: "button", class: "link danger" }, "remove");
      remove.addEventListener("click", () => {
        draft().failures.splice(i, 1);
        draft().causes = draft().causes.filter(
          (pair) => pair.effect !== failure.key && pair.cause !== failure.key,
        );
        render();
      });
      body.append(
        el(
          "fieldset",
          { class: "failure-entry", "data-key": failure.key },
          el("legend", {}, el("span", { class: "mono" }, failure.key), " ", remove),
          el("label", {}, "failure", labelInput, fieldSlot(`${at}.label`)),
          el("label", {}, "category", categoryInput, fieldSlot(`${at}.category`)),
          el("label", {}, "attach to", attachSelect, fieldSlot(`${at}.attach`)),
          el("label", {}, "notes", descriptionInput),
        ),
      );
    });

    const add = el("button", { type: "button", class: "secondary" }, "add failure");
    add.addEventListener("click", () => {
      draft().failures.push({
        key: nextKey(draft()),
        label: "",
        category: "",
        attach: deps.state.selected?.id ?? "",
        description: "",
      });
      render();
    });
    body.append(add);
    container.append(body);
  }

  function attachPicker(at: string, value: string, onChange: (value: string) => void): HTMLElement {
    const select = el("select", { "data-field": `${at}.attach` });
    select.append(el("option", { value: "" }, "pick a system node..."));
    for (const level of LEVELS) {
      const group = el("optgroup", { label: level });
      for (const system of systems) {
        if (system.level !== level) continue;
        group.append(el("option", { value: system.id }, `${system.label} (${system.id})`));
      }
      if (group.children.length > 0) select.append(group);
    }
    select.value = value;
    select.addEventListener("change", () => onChange(select.value));
    return select;
  }

  function renderLinks(): void {
    const body = el("div", { class: "wizard-body" });
    body.append(
      el(
        "p",
        { class: "muted" },
        "click the effect first, then its cause; each click pair adds one link",
      ),
    );
    const chips = el("div", { class: "key-chips" });
    for (const failure of draft().failures) {
      const chip = el(
        "button",
        {
          type: "button",
          class: linking === failure.key ? "chip effect-armed" : "chip",
          "data-key": failure.key,
        },
        `${failure.key}: ${failure.label || "(unnamed)"}`,
      );
      chip.addEventListener("click", () => {
        if (linking === null) {
          linking = failure.key;
        } else if (linking === failure.key) {
          linking = null;
        } else {
          draft().causes.push({ effect: linking, cause: failure.key });
          linking = null;
        }
        render();
      });
      chips.append(chip);
    }
    body.append(chips);

    const existingInput = el("input", {
      placeholder: "existing failure id, e.g. mr-0042:f3",
      "data-field": "existing-cause",
    });
    const existingButton = el("button", { type: "button", class: "secondary" }, "link armed effect to it");
    existingButton.addEventListener("click", () => {
      if (linking !== null && existingInput.value) {
        draft().causes.push({ effect: linking, cause_existing: existingInput.value });
        linking = null;
        render();
      }
    });
    body.append(
      el(
        "div",
        { class: "existing-link" },
        el("label", {}, "or a cause already in the graph", existingInput),
        existingButton,
      ),
    );

    const pairList = el("ul", { class: "pair-list" });
    draft().causes.forEach((pair, i) => {
      const remove = el("button", { type: "button", class: "link danger" }, "remove");
      remove.addEventListener("click", () => {
        draft().causes.splice(i, 1);
        render();
      });
      pairList.append(
        el(
          "li",
          { "data-pair": describePair(pair) },
          el("span", { class: "mono" }, describePair(pair)),
          " ",
          remove,
          " ",
          fieldSlot(`causes[${i}]`),
        ),
      );
    });
    body.append(pairList, fieldSlot("causes"));
    container.append(body);
  }

  function renderReview(): void {
    const body = el("div", { class: "wizard-body" });
    const current = draft();
    const summary = el("dl", { class: "review" });
    summary.append(
      el("dt", {}, "record id"),
      el("dd", { class: "mono" }, current.record_id || "(missing)"),
      el("dt", {}, "failures"),
      el(
        "dd",
        {},
        current.failures.length === 0
          ? "none yet"
          : list(
              current.failures.map(
                (failure) =>
                  `${failure.key}: ${failure.label} [${failure.category}] @ ${failure.attach || "?"}`,
              ),
            ),
      ),
      el("dt", {}, "cause links"),
      el(
        "dd",
        {},
        current.causes.length === 0 ? "none" : list(current.causes.map(describePair)),
      ),
    );
    body.append(summary);

    if (violations.length > 0) {
      const problems = el("ul", { class: "violations", role: "alert" });
      for (const violation of violations) {
        problems.append(el("li", {}, `${violation.field}: ${violation.code}: ${violation.message}`));
      }
      body.append(problems);
    }

    const submit = el("button", { type: "button", class: "primary", "data-action": "submit" }, "submit record");
    submit.addEventListener("click", () => {
      handle.pending = doSubmit();
    });
    body.append(submit);
    container.append(body);
  }

  async function doSubmit(): Promise<void> {
    notice = null;
    violations = validateDraft(draft(), systemIds);
    if (violations.length > 0) {
      render();
      return;
    }
    try {
      const ack = await deps.submit(draft());
      notice = el(
        "p",
        { class: "success-banner", "data-record-count": String(ack.record_count) },
        `saved ${ack.record_id}: ${ack.failures_added} failure(s); the graph now holds ${ack.record_count} records`,
      );
      deps.state.draft = emptyDraft();
      step = 0;
      violations = [];
      render();
      deps.onSubmitted(ack);
    } catch (error) {
      const described =
        error instanceof Error && "code" in error
          ? `${(error as { code: string }).code}: ${error.message}`
          : String(error);
      notice = el("p", { class: "error-banner", role: "alert" }, described);
      render();
    }
  }

  render();
  return handle;
}

function describePair(pair: DraftCause): string {
  const cause = pair.cause !== undefined ? pair.cause : `graph:${pair.cause_existing}`;
  return `${pair.effect} <- ${cause}`;
}

function list(items: string[]): HTMLElement {
  const node = el("ul", {});
  for (const item of items) node.append(el("li", {}, item));
  return node;
}

function flatten(roots: TreeNode[]): SystemOption[] {
  const out: SystemOption[] = [];
  const walk = (node: TreeNode): void => {
    out.push({ id: node.id, label: node.label, level: node.level });
    node.children.forEach(walk);
  };
  roots.forEach(walk);
  return out;
}
