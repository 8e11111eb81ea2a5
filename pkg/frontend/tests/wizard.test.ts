import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiError } from "../src/api";
import { validateDraft } from "../src/rules";
import { initialState } from "../src/state";
import type { RecordDraft, SubmitAck, TreeNode } from "../src/types";
import { mountWizard, type WizardDeps } from "../src/wizard";
import { fire } from "./mock";

const ATTACH = "line/press/close-jaws";

function node(
  id: string,
  label: string,
  level: TreeNode["level"],
  children: TreeNode[] = [],
): TreeNode {
  return {
    id,
    label,
    level,
    description: "",
    failures: 0,
    attached: [],
    subtree_failures: 0,
    after: [],
    children,
  };
}

const ROOTS = [
  node("line", "line", "LineFunction", [
    node("line/press", "press", "ProcessFunction", [
      node(ATTACH, "close jaws", "ProcessElementFunction"),
    ]),
  ]),
];

const SYSTEM_IDS = new Set(["line", "line/press", ATTACH]);

function mount(partial: Partial<WizardDeps> = {}) {
  const container = document.createElement("div");
  document.body.append(container);
  const state = initialState();
  const deps: WizardDeps = {
    submit: vi.fn(() => Promise.reject(new Error("no ack wired"))),
    state,
    onSubmitted: vi.fn(),
    ...partial,
  };
  const handle = mountWizard(container, deps);
  handle.setSystems(ROOTS);
  return { container, state, deps, handle };
}

function input(container: HTMLElement, field: string, value: string): void {
  const box = container.querySelector<HTMLInputElement>(`input[data-field="${field}"]`);
  box!.value = value;
  fire(box!, "input");
}

function pick(container: HTMLElement, field: string, value: string): void {
  const select = container.querySelector<HTMLSelectElement>(`select[data-field="${field}"]`);
  select!.value = value;
  fire(select!, "change");
}

function clickText(container: HTMLElement, text: string): void {
  const button = [...container.querySelectorAll("button")].find(
    (candidate) => candidate.textContent === text,
  );
  button!.click();
}

function addFailure(container: HTMLElement, i: number, label: string, category: string): void {
  clickText(container, "add failure");
  input(container, `failures[${i}].label`, label);
  input(container, `failures[${i}].category`, category);
  pick(container, `failures[${i}].attach`, ATTACH);
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("record entry wizard", () => {
  it("submits a valid single-failure record and reports the new count", async () => {
    const ack: SubmitAck = { record_id: "mr-0200", failures_added: 1, record_count: 169 };
    const submit = vi.fn((_draft: RecordDraft) => Promise.resolve(ack));
    const onSubmitted = vi.fn();
    const { container, state, handle } = mount({ submit, onSubmitted });

    input(container, "record_id", "mr-0200");
    addFailure(container, 0, "roof slips in the chuck", "motion");
    clickText(container, "3. review & submit");
    clickText(container, "submit record");
    await handle.pending;

    expect(submit).toHaveBeenCalledTimes(1);
    const sent = submit.mock.calls[0]![0];
    expect(sent).toEqual({
      record_id: "mr-0200",
      author: "",
      date: "",
      failures: [
        {
          key: "f0",
          label: "roof slips in the chuck",
          category: "motion",
          attach: ATTACH,
          description: "",
        },
      ],
      causes: [],
    });
    // what went over the wire satisfies the same rules the server applies
    expect(validateDraft(sent, SYSTEM_IDS)).toEqual([]);

    const banner = container.querySelector(".success-banner");
    expect(banner?.getAttribute("data-record-count")).toBe("169");
    expect(banner?.textContent).toContain("the graph now holds 169 records");
    expect(onSubmitted).toHaveBeenCalledWith(ack);
    // a fresh draft, back on step one
    expect(state.draft.record_id).toBe("");
    expect(state.draft.failures).toEqual([]);
    expect(container.querySelector(".step.active")?.textContent).toBe("1. failures");
  });

  it("links causes by clicking effect then cause", async () => {
    const ack: SubmitAck = { record_id: "mr-0201", failures_added: 2, record_count: 170 };
    const submit = vi.fn((_draft: RecordDraft) => Promise.resolve(ack));
    const { container, handle } = mount({ submit });

    input(container, "record_id", "mr-0201");
    addFailure(container, 0, "roof slips", "motion");
    addFailure(container, 1, "jaw worn", "mechanism_structure");
    clickText(container, "2. cause links");

    const chip = (key: string) =>
      container.querySelector<HTMLElement>(`button[data-key="${key}"]`);
    chip("f0")!.click();
    expect(chip("f0")!.className).toContain("effect-armed");
    chip("f1")!.click();
    expect(container.querySelector('li[data-pair="f0 <- f1"]')).not.toBeNull();

    clickText(container, "3. review & submit");
    clickText(container, "submit record");
    await handle.pending;
    expect(submit.mock.calls[0]![0].causes).toEqual([{ effect: "f0", cause: "f1" }]);
  });

  it("disarms an armed effect when clicked again", () => {
    const { container } = mount();
    addFailure(container, 0, "roof slips", "motion");
    clickText(container, "2. cause links");
    const chip = container.querySelector<HTMLElement>('button[data-key="f0"]');
    chip!.click();
    container.querySelector<HTMLElement>('button[data-key="f0"]')!.click();
    expect(container.querySelector(".effect-armed")).toBeNull();
    expect(container.querySelectorAll("li[data-pair]").length).toBe(0);
  });

  it("links an armed effect to a failure already in the graph", async () => {
    const ack: SubmitAck = { record_id: "mr-0202", failures_added: 1, record_count: 170 };
    const submit = vi.fn((_draft: RecordDraft) => Promise.resolve(ack));
    const { container, handle } = mount({ submit });

    input(container, "record_id", "mr-0202");
    addFailure(container, 0, "roof slips", "motion");
    clickText(container, "2. cause links");
    container.querySelector<HTMLElement>('button[data-key="f0"]')!.click();
    input(container, "existing-cause", "mr-0042:f3");
    clickText(container, "link armed effect to it");
    expect(container.querySelector('li[data-pair="f0 <- graph:mr-0042:f3"]')).not.toBeNull();

    clickText(container, "3. review & submit");
    clickText(container, "submit record");
    await handle.pending;
    expect(submit.mock.calls[0]![0].causes).toEqual([
      { effect: "f0", cause_existing: "mr-0042:f3" },
    ]);
  });

  it("rejects a drawn cycle on the client; nothing is sent", async () => {
    const submit = vi.fn(() => Promise.reject(new Error("must not be called")));
    const { container, handle } = mount({ submit });

    input(container, "record_id", "mr-0203");
    addFailure(container, 0, "roof slips", "motion");
    addFailure(container, 1, "jaw worn", "mechanism_structure");
    clickText(container, "2. cause links");
    const chip = (key: string) =>
      container.querySelector<HTMLElement>(`button[data-key="${key}"]`);
    chip("f0")!.click();
    chip("f1")!.click();
    chip("f1")!.click();
    chip("f0")!.click();

    clickText(container, "3. review & submit");
    clickText(container, "submit record");
    await handle.pending;

    expect(submit).not.toHaveBeenCalled();
    const problems = container.querySelector("ul.violations");
    expect(problems?.textContent).toContain("record-cause-cycle");
    expect(problems?.textContent).toContain("f0 -> f1 -> f0");
  });

  it("pins field problems to the inputs they came from", async () => {
    const submit = vi.fn(() => Promise.reject(new Error("must not be called")));
    const { container, handle } = mount({ submit });

    clickText(container, "add failure");
    input(container, "failures[0].label", "roof slips");
    // category and attach left empty, record id too
    clickText(container, "3. review & submit");
    clickText(container, "submit record");
    await handle.pending;
    expect(submit).not.toHaveBeenCalled();

    clickText(container, "1. failures");
    const slot = (field: string) =>
      container.querySelector(`span.field-error[data-field="${field}"]`);
    expect(slot("record_id")?.textContent).toContain("empty-record-id");
    expect(slot("failures[0].category")?.textContent).toContain("empty-category");
    expect(slot("failures[0].attach")?.textContent).toContain("empty-attach");
  });

  it("shows the server's verdict when it rejects the record", async () => {
    const submit = vi.fn(() =>
      Promise.reject(new ApiError("duplicate-failure-id", "failure id 'mr-0001:f0' already exists")),
    );
    const { container, state, handle } = mount({ submit });

    input(container, "record_id", "mr-0001");
    addFailure(container, 0, "roof slips", "motion");
    clickText(container, "3. review & submit");
    clickText(container, "submit record");
    await handle.pending;

    const banner = container.querySelector(".error-banner");
    expect(banner?.textContent).toBe("duplicate-failure-id: failure id 'mr-0001:f0' already exists");
    // the draft survives for the fix-up
    expect(state.draft.record_id).toBe("mr-0001");
    expect(state.draft.failures.length).toBe(1);
  });

  it("drops the pairs naming a failure when it is removed", () => {
    const { container, state } = mount();
    addFailure(container, 0, "roof slips", "motion");
    addFailure(container, 1, "jaw worn", "mechanism_structure");
    clickText(container, "2. cause links");
    container.querySelector<HTMLElement>('button[data-key="f0"]')!.click();
    container.querySelector<HTMLElement>('button[data-key="f1"]')!.click();
    expect(state.draft.causes.length).toBe(1);

    clickText(container, "1. failures");
    const entry = container.querySelector('fieldset[data-key="f1"]');
    const remove = [...entry!.querySelectorAll("button")].find(
      (button) => button.textContent === "remove",
    );
    remove!.click();
    expect(state.draft.failures.map((failure) => failure.key)).toEqual(["f0"]);
    expect(state.draft.causes).toEqual([]);
  });

  it("starts a new failure at the node selected in the tree", () => {
    const { container, state } = mount();
    state.selected = node(ATTACH, "close jaws", "ProcessElementFunction");
    clickText(container, "add failure");
    expect(state.draft.failures[0]?.attach).toBe(ATTACH);
    const select = container.querySelector<HTMLSelectElement>(
      'select[data-field="failures[0].attach"]',
    );
    expect(select?.value).toBe(ATTACH);
  });

  it("offers every model node grouped by level in the attach picker", () => {
    const { container } = mount();
    clickText(container, "add failure");
    const select = container.querySelector('select[data-field="failures[0].attach"]');
    const groups = select!.querySelectorAll("optgroup");
    expect([...groups].map((group) => group.getAttribute("label"))).toEqual([
      "LineFunction",
      "ProcessFunction",
      "ProcessElementFunction",
    ]);
    const values = [...select!.querySelectorAll("option")].map((option) => option.value);
    expect(values).toEqual(["", "line", "line/press", ATTACH]);
  });
});
