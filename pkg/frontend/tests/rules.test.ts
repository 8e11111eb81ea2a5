import { describe, expect, it } from "vitest";

import { findCycle, validateDraft } from "../src/rules";
import type { RecordDraft } from "../src/types";

const NODE = "line/press/close-jaws";

function draft(overrides: Partial<RecordDraft> = {}): RecordDraft {
  return {
    record_id: "mr-0200",
    author: "",
    date: "",
    failures: [
      { key: "f0", label: "roof slips", category: "motion", attach: NODE, description: "" },
      { key: "f1", label: "jaw worn", category: "mechanism_structure", attach: NODE, description: "" },
    ],
    causes: [{ effect: "f0", cause: "f1" }],
    ...overrides,
  };
}

const SYSTEMS = new Set([NODE]);

describe("validateDraft", () => {
  it("accepts a well-formed draft", () => {
    expect(validateDraft(draft(), SYSTEMS)).toEqual([]);
  });

  it("accepts a record id that already exists; only the server knows ids", () => {
    // reusing an id with fresh keys extends the record, so no client check
    expect(validateDraft(draft({ record_id: "mr-0001" }), SYSTEMS)).toEqual([]);
  });

  it("flags an empty record id", () => {
    const violations = validateDraft(draft({ record_id: "  " }), SYSTEMS);
    expect(violations).toMatchObject([{ field: "record_id", code: "empty-record-id" }]);
  });

  it("flags blank and duplicate failure fields where they sit", () => {
    const bad = draft();
    bad.failures[1] = { key: "f0", label: "", category: "", attach: "", description: "" };
    bad.causes = [];
    const codes = validateDraft(bad, SYSTEMS).map((v) => [v.field, v.code]);
    expect(codes).toContainEqual(["failures[1].key", "duplicate-key"]);
    expect(codes).toContainEqual(["failures[1].label", "empty-label"]);
    expect(codes).toContainEqual(["failures[1].category", "empty-category"]);
    expect(codes).toContainEqual(["failures[1].attach", "empty-attach"]);
  });

  it("flags an attach point that is not in the model", () => {
    const bad = draft();
    bad.failures[0]!.attach = "line/no-such-node";
    expect(validateDraft(bad, SYSTEMS)).toMatchObject([
      { field: "failures[0].attach", code: "unknown-attach" },
    ]);
  });

  it("requires exactly one of cause and cause_existing", () => {
    const neither = draft({ causes: [{ effect: "f0" }] });
    expect(validateDraft(neither, SYSTEMS)).toMatchObject([
      { field: "causes[0]", code: "cause-choice" },
    ]);
    const both = draft({ causes: [{ effect: "f0", cause: "f1", cause_existing: "mr-0001:f1" }] });
    expect(validateDraft(both, SYSTEMS)).toMatchObject([
      { field: "causes[0]", code: "cause-choice" },
    ]);
  });

  it("flags effects and causes that are not keys of this record", () => {
    const bad = draft({ causes: [{ effect: "f9", cause: "f8" }] });
    const codes = validateDraft(bad, SYSTEMS).map((v) => [v.field, v.code]);
    expect(codes).toContainEqual(["causes[0].effect", "undeclared-key"]);
    expect(codes).toContainEqual(["causes[0].cause", "undeclared-key"]);
  });

  it("flags a repeated pair once", () => {
    const bad = draft({
      causes: [
        { effect: "f0", cause: "f1" },
        { effect: "f0", cause: "f1" },
      ],
    });
    expect(validateDraft(bad, SYSTEMS)).toMatchObject([
      { field: "causes[1]", code: "duplicate-edge" },
    ]);
  });

  it("checks cause_existing against the known failures when given", () => {
    const existing = draft({ causes: [{ effect: "f0", cause_existing: "mr-0042:f3" }] });
    expect(validateDraft(existing, SYSTEMS, new Set(["mr-0042:f3"]))).toEqual([]);
    expect(validateDraft(existing, SYSTEMS, new Set(["mr-0001:f1"]))).toMatchObject([
      { field: "causes[0].cause", code: "unknown-id" },
    ]);
    // without the set the check is the server's to make
    expect(validateDraft(existing, SYSTEMS)).toEqual([]);
  });

  it("rejects a drawn cycle before anything is sent", () => {
    const bad = draft({
      causes: [
        { effect: "f0", cause: "f1" },
        { effect: "f1", cause: "f0" },
      ],
    });
    const violations = validateDraft(bad, SYSTEMS);
    expect(violations).toMatchObject([{ field: "causes", code: "record-cause-cycle" }]);
    expect(violations[0]!.message).toContain("f0 -> f1 -> f0");
  });

  it("rejects a self-loop", () => {
    const bad = draft({ causes: [{ effect: "f0", cause: "f0" }] });
    expect(validateDraft(bad, SYSTEMS).map((v) => v.code)).toContain("record-cause-cycle");
  });
});

describe("findCycle", () => {
  it("returns null for a chain", () => {
    expect(
      findCycle(["a", "b", "c"], [["a", "b"], ["b", "c"]]),
    ).toBeNull();
  });

  it("returns the looping path", () => {
    const cycle = findCycle(["a", "b", "c"], [["a", "b"], ["b", "c"], ["c", "a"]]);
    expect(cycle).toEqual(["a", "b", "c"]);
  });

  it("ignores edges naming unknown nodes", () => {
    expect(findCycle(["a"], [["a", "ghost"]])).toBeNull();
  });
});
