import type {
  BundleFile,
  CompatibilityReport,
  ConfigOverrides,
  IncompatibleStatement,
  ProblemFile,
  ResultsResponse,
  Session,
  SessionSummary,
  StatementEntry,
  StatusResponse,
} from "./types";

/** A non-2xx answer, with the decoded JSON body when there is one. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: unknown,
  ) {
    super(typeof body === "object" && body && "error" in body ? String((body as { error: unknown }).error) : `HTTP ${status}`);
  }

  /** True for 409: a run is in flight for this session. */
  get busy(): boolean {
    return this.status === 409;
  }

  /** The ε* report when a statement was rejected as incompatible. */
  get incompatibility(): IncompatibleStatement | undefined {
    const b = this.body as Partial<IncompatibleStatement> | undefined;
    return this.status === 422 && b && Array.isArray(b.binding) ? (b as IncompatibleStatement) : undefined;
  }
}

export class Client {
  constructor(private readonly base = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method,
      headers: { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await res.text();
    const data = text ? JSON.parse(text) : undefined;
    if (!res.ok) throw new ApiError(res.status, data);
    return data as T;
  }

  createSession(problem: ProblemFile): Promise<Session> {
    return this.request("POST", "/sessions", problem);
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("GET", "/sessions");
  }

  session(id: number): Promise<Session> {
    return this.request("GET", `/sessions/${id}`);
  }

  addStatement(id: number, text: string): Promise<{ statement: StatementEntry; revision: number; epsilon_star: number | null }> {
    return this.request("POST", `/sessions/${id}/statements`, { text });
  }

  removeStatement(id: number, statementId: number): Promise<{ removed: StatementEntry; revision: number }> {
    return this.request("DELETE", `/sessions/${id}/statements/${statementId}`);
  }

  compatibility(id: number): Promise<CompatibilityReport> {
    return this.request("GET", `/sessions/${id}/compatibility`);
  }

  run(id: number, config: ConfigOverrides = {}): Promise<{ status: "running"; revision: number }> {
    return this.request("POST", `/sessions/${id}/run`, config);
  }

  status(id: number): Promise<StatusResponse> {
    return this.request("GET", `/sessions/${id}/status`);
  }

  results(id: number): Promise<ResultsResponse> {
    return this.request("GET", `/sessions/${id}/results`);
  }

  /** URL of a bundle file, for downloads. */
  fileUrl(id: number, file: BundleFile): string {
    return `${this.base}/sessions/${id}/results/${file}`;
  }

  /** Polls the status endpoint until the run leaves `running`. */
  async waitForRun(id: number, intervalMs = 500): Promise<StatusResponse> {
    for (;;) {
      const s = await this.status(id);
      if (s.status !== "running") return s;
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}
