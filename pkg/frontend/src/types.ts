// Payload shapes of the /v1 API, field for field. The service wraps every
// body in an envelope; api.ts unwraps it and hands these around.

export type LevelName =
  | "LineFunction"
  | "ProcessFunction"
  | "ProcessElementFunction"
  | "Behavior"
  | "Structure";

export const LEVELS: LevelName[] = [
  "LineFunction",
  "ProcessFunction",
  "ProcessElementFunction",
  "Behavior",
  "Structure",
];

export const LEVEL_BADGE: Record<LevelName, string> = {
  LineFunction: "LF",
  ProcessFunction: "PF",
  ProcessElementFunction: "PEF",
  Behavior: "B",
  Structure: "S",
};

export interface Envelope<T> {
  status: "ok" | "error";
  payload?: T;
  error?: { code: string; message: string; detail?: unknown };
}

export interface HealthInfo {
  service: string;
  version: string;
}

export interface GraphSummary {
  system_nodes: number;
  failure_nodes: number;
  edges: number;
  records: number;
  by_level: Record<string, number>;
  by_kind: Record<string, number>;
  validated: boolean;
  version: number;
}

export interface FailureBrief {
  id: string;
  label: string;
  category: string;
}

export interface TreeNode {
  id: string;
  label: string;
  level: LevelName;
  description: string;
  failures: number;
  attached: FailureBrief[];
  subtree_failures: number;
  after: string[];
  children: TreeNode[];
}

export interface RecordRow {
  record_id: string;
  failures: number;
  attach_levels: LevelName[];
}

export interface DiagnoseRequest {
  description: string;
  method: string;
  n: number;
  level?: LevelName;
  attach_hint?: string;
  dedup?: boolean;
}

export interface RankedCause {
  rank: number;
  label: string;
  failure_id: string;
  score: number;
  provenance: string[];
}

export interface DiagnoseResult {
  method: string;
  level: LevelName | null;
  results: RankedCause[];
}

export interface FailureDetail {
  id: string;
  label: string;
  category: string;
  record_id: string;
  description: string;
  attached_to: { id: string; label: string; level: LevelName } | null;
  causes: FailureBrief[];
  effects: FailureBrief[];
}

export interface SubmitAck {
  record_id: string;
  failures_added: number;
  record_count: number;
}

export interface EvalRow {
  query: string;
  method: string;
  n: number;
  precision: number;
  recall: number;
}

// The record draft mirrors the body POST /v1/records accepts. A cause pair
// names either another key of the same draft or an existing failure id.
export interface DraftFailure {
  key: string;
  label: string;
  category: string;
  attach: string;
  description: string;
}

export interface DraftCause {
  effect: string;
  cause?: string;
  cause_existing?: string;
}

export interface RecordDraft {
  record_id: string;
  author: string;
  date: string;
  failures: DraftFailure[];
  causes: DraftCause[];
}
