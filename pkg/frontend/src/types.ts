// Payload shapes mirroring the service API JSON, snake_case and all.
// View models never recompute these numbers; they only rearrange them.

export interface Histogram {
  edges: number[];
  counts: number[];
  underflow: number;
  overflow: number;
  log_scale: boolean;
}

export interface FeatureStats {
  count: number;
  mean: number;
  std: number;
  histogram: Histogram;
}

export interface CorpusStats {
  doc_count: number;
  total_chars: number;
  length: FeatureStats | null;
  perplexity: FeatureStats | null;
  languages: Record<string, number> | null;
  seed: number | null;
}

export interface FeatureDiff {
  compatible: boolean;
  missing_in?: string;
  count_delta?: number;
  mean_delta?: number;
  std_delta?: number;
  bin_deltas?: number[] | null;
  binning_mismatch?: boolean;
}

export interface DiffReport {
  doc_count_delta: number;
  total_chars_delta: number;
  features: Record<string, FeatureDiff>;
  languages_delta?: Record<string, number>;
}

export interface SearchHit {
  doc_id: string;
  score: number;
  snippet: string;
}

export interface SearchResponse {
  query: string;
  k: number;
  hits: SearchHit[];
}

export interface OperatorParam {
  name: string;
  type: string;
  required: boolean;
  default: unknown;
  choices: string[] | null;
}

export interface OperatorInfo {
  name: string;
  kind: string;
  doc: string;
  params: OperatorParam[];
}

export interface SweepRequest {
  filter: string;
  param: string;
  values: number[];
  sample?: number;
  seed?: number;
  params?: Record<string, unknown>;
}

export interface SweepResult {
  filter_name: string;
  param_name: string;
  values: number[];
  filter_ratios: number[];
  sample_size: number;
  seed: number;
}

export interface CleanRule {
  scope: string;
  matcher: string;
  pattern: string;
  action?: string;
  replace_with?: string;
  fixpoint?: boolean;
}

export interface CleanPreviewRequest {
  rule: CleanRule;
  sample?: number;
  seed?: number;
  max_cases?: number;
}

export interface MatchCase {
  doc_id: string;
  start: number;
  end: number;
  context: string;
}

export interface MatchCaseReport {
  rule: Required<CleanRule>;
  total_matches: number;
  cases: MatchCase[];
  sample_size: number;
  seed: number;
}

export interface ConfigResponse {
  path: string;
  version: number;
  content: string;
}

export interface ConfigSavedResponse {
  path: string;
  version: number;
  valid: boolean;
}

export interface PipelineRunRequest {
  config_path: string;
  input: string;
  output: string;
  report?: string | null;
}

export interface RunStatus {
  run_id: string;
  state: "running" | "done" | "error";
  output?: string;
  report?: unknown;
  error?: string;
}

export type RequestState =
  | { kind: "idle" }
  | { kind: "loading" }
  | { kind: "error"; message: string };
