// One ViewState instance, owned by the app shell and shared by the views:
// the selected model node, the query draft, the latest ranked lists, the
// record draft being assembled, and whatever the dashboard last loaded.

import type {
  DiagnoseResult,
  EvalRow,
  FailureDetail,
  LevelName,
  RecordDraft,
  TreeNode,
} from "./types";

export interface QueryDraft {
  description: string;
  level: LevelName;
  n: number;
  sideBySide: boolean;
}

export interface ViewState {
  selected: TreeNode | null;
  query: QueryDraft;
  results: { proposed: DiagnoseResult | null; baseline: DiagnoseResult | null };
  draft: RecordDraft;
  evalRows: EvalRow[];
}

export function initialState(): ViewState {
  return {
    selected: null,
    query: { description: "", level: "ProcessFunction", n: 10, sideBySide: false },
    results: { proposed: null, baseline: null },
    draft: emptyDraft(),
    evalRows: [],
  };
}

export function emptyDraft(): RecordDraft {
  return { record_id: "", author: "", date: "", failures: [], causes: [] };
}

/** First unused f<i> key of the draft. */
export function nextKey(draft: RecordDraft): string {
  const used = new Set(draft.failures.map((failure) => failure.key));
  let i = 0;
  while (used.has(`f${i}`)) i += 1;
  return `f${i}`;
}

/**
 * Draft for a verified diagnosis: the observed symptom as f0, the confirmed
 * cause as f1 attached where its past occurrence was, linked f0 <- f1. The
 * technician still picks where the symptom showed up.
 */
export function verifiedDraft(
  symptom: string,
  confirmed: FailureDetail,
  date: string,
): RecordDraft {
  return {
    record_id: "",
    author: "",
    date,
    failures: [
      { key: "f0", label: symptom, category: "accuracy", attach: "", description: "" },
      {
        key: "f1",
        label: confirmed.label,
        category: confirmed.category,
        attach: confirmed.attached_to?.id ?? "",
        description: "",
      },
    ],
    causes: [{ effect: "f0", cause: "f1" }],
  };
}

export function today(): string {
  return new Date().toISOString().slice(0, 10);
}
