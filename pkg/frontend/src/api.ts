import type {
  CleanPreviewRequest,
  ConfigResponse,
  ConfigSavedResponse,
  CorpusStats,
  DiffReport,
  MatchCaseReport,
  OperatorInfo,
  PipelineRunRequest,
  RunStatus,
  SearchResponse,
  SweepRequest,
  SweepResult,
} from "./types.js";

/** Error body the service produces for every failing handler. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Everything the panels can ask of the backend; mocked wholesale in tests. */
export interface ApiClient {
  health(): Promise<{ status: string }>;
  stats(): Promise<CorpusStats>;
  statsDiff(raw: string, refined: string): Promise<DiffReport>;
  search(q: string, k: number): Promise<SearchResponse>;
  operators(): Promise<OperatorInfo[]>;
  sweep(request: SweepRequest): Promise<SweepResult>;
  cleanPreview(request: CleanPreviewRequest): Promise<MatchCaseReport>;
  getConfig(): Promise<ConfigResponse>;
  putConfig(content: string, validateOnly?: boolean): Promise<ConfigSavedResponse>;
  runPipeline(request: PipelineRunRequest): Promise<{ run_id: string }>;
  runStatus(runId: string): Promise<RunStatus>;
}

async function parse<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body: keep the status line
  }
  throw new ApiError(response.status, code, message);
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string, params?: Record<string, string>): string {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    return `${this.baseUrl}${path}${query}`;
  }

  private get<T>(path: string, params?: Record<string, string>): Promise<T> {
    return fetch(this.url(path, params)).then((r) => parse<T>(r));
  }

  private send<T>(method: string, path: string, body: unknown): Promise<T> {
    return fetch(this.url(path), {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => parse<T>(r));
  }

  health() {
    return this.get<{ status: string }>("/api/health");
  }

  stats() {
    return this.get<CorpusStats>("/api/stats");
  }

  statsDiff(raw: string, refined: string) {
    return this.get<DiffReport>("/api/stats/diff", { raw, refined });
  }

  search(q: string, k: number) {
    return this.get<SearchResponse>("/api/search", { q, k: String(k) });
  }

  operators() {
    return this.get<OperatorInfo[]>("/api/operators");
  }

  sweep(request: SweepRequest) {
    return this.send<SweepResult>("POST", "/api/debug/sweep", request);
  }

  cleanPreview(request: CleanPreviewRequest) {
    return this.send<MatchCaseReport>("POST", "/api/debug/clean-preview", request);
  }

  getConfig() {
    return this.get<ConfigResponse>("/api/config");
  }

  putConfig(content: string, validateOnly = false) {
    return this.send<ConfigSavedResponse>("PUT", "/api/config", {
      content,
      validate_only: validateOnly,
    });
  }

  runPipeline(request: PipelineRunRequest) {
    return this.send<{ run_id: string }>("POST", "/api/pipeline/run", request);
  }

  runStatus(runId: string) {
    return this.get<RunStatus>(`/api/pipeline/runs/${runId}`);
  }
}

export function errorMessage(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`;
  }
  return error instanceof Error ? error.message : String(error);
}
