import type {
  DiagnoseRequest,
  DiagnoseResult,
  Envelope,
  EvalRow,
  FailureDetail,
  GraphSummary,
  HealthInfo,
  RecordDraft,
  RecordRow,
  SubmitAck,
  TreeNode,
} from "./types";

/** A non-ok envelope from the service, with its stable error code. */
export class ApiError extends Error {
  code: string;
  detail: unknown;

  constructor(code: string, message: string, detail?: unknown) {
    super(message);
    this.code = code;
    this.detail = detail;
  }
}

async function unwrap<T>(response: Response, path: string): Promise<T> {
  let body: Envelope<T>;
  try {
    body = await response.json();
  } catch {
    throw new ApiError("bad-response", `${path}: HTTP ${response.status} with a non-JSON body`);
  }
  if (body.status !== "ok" || body.payload === undefined) {
    const err = body.error ?? { code: "bad-response", message: `${path}: HTTP ${response.status}` };
    throw new ApiError(err.code, err.message, err.detail);
  }
  return body.payload;
}

export class ApiClient {
  constructor(private base = "") {}

  private get<T>(path: string): Promise<T> {
    return fetch(this.base + path).then((response) => unwrap<T>(response, path));
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return fetch(this.base + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((response) => unwrap<T>(response, path));
  }

  health(): Promise<HealthInfo> {
    return this.get("/v1/health");
  }

  graph(): Promise<GraphSummary> {
    return this.get("/v1/graph");
  }

  tree(): Promise<{ roots: TreeNode[] }> {
    return this.get("/v1/graph/tree");
  }

  records(): Promise<{ records: RecordRow[] }> {
    return this.get("/v1/records");
  }

  failure(id: string): Promise<FailureDetail> {
    return this.get(`/v1/failures/${encodeURIComponent(id)}`);
  }

  diagnose(request: DiagnoseRequest): Promise<DiagnoseResult> {
    return this.post("/v1/diagnose", request);
  }

  submitRecord(draft: RecordDraft): Promise<SubmitAck> {
    return this.post("/v1/records", draft);
  }

  evalRun(suite: unknown, methods?: string[]): Promise<{ results: EvalRow[] }> {
    return this.post("/v1/eval", methods ? { suite, methods } : { suite });
  }
}
