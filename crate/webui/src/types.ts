// Payloads of the smaa-choquet HTTP service. Field names follow the JSON
// exactly; numbers are shown as received, never recomputed.

export type Direction = "maximize" | "minimize";
export type EvalSampling = "continuous" | "integer";
export type ScaleMode = "given" | "search";
export type Case = "precise" | "interval" | "scale";
export type RunStatus = "idle" | "running" | "done" | "failed";

/** A point value or a closed interval `[lo, hi]`. */
export type Evaluation = number | [number, number];

export interface ConfigOverrides {
  iterations?: number;
  seed?: number;
  burn_in?: number;
  thinning?: number;
  workers?: number;
  eval_sampling?: EvalSampling;
  epsilon_min?: number;
  inner_steps?: number;
  scale_mode?: ScaleMode;
  candidates?: number;
}

export interface ProblemFile {
  criteria: { label: string; direction?: Direction }[];
  alternatives: { label: string; evaluations: Evaluation[] }[];
  preferences?: string[];
  config?: ConfigOverrides;
}

export interface StatementEntry {
  id: number;
  text: string;
}

export interface SessionSummary {
  id: number;
  revision: number;
  status: RunStatus;
  criteria: number;
  alternatives: number;
  statements: number;
  results_revision: number | null;
  stale: boolean;
}

export interface Session {
  id: number;
  revision: number;
  status: RunStatus;
  error: string | null;
  problem: ProblemFile;
  statements: StatementEntry[];
  results_revision: number | null;
  stale: boolean;
}

export interface StatementStatus {
  id: number;
  text: string;
  block: "C" | "A";
  checked: boolean;
  binding: boolean;
}

export interface CompatibilityReport {
  epsilon_star: number | null;
  epsilon_min: number;
  compatible: boolean;
  scope: "all" | "criterion_statements";
  statements: StatementStatus[];
  revision: number;
}

export interface RunConfig {
  iterations: number;
  seed: number;
  burn_in: number;
  thinning: number;
  workers: number;
  eval_sampling: EvalSampling;
  epsilon_min: number;
  inner_steps: number;
}

export interface CommonScale {
  columns: { levels: number[]; values: number[] }[];
}

export interface SmaaResults {
  case: Case;
  alternatives: number;
  criteria: number;
  iterations_total: number;
  iterations_feasible: number;
  /** `rank_acceptability[k][r - 1]`, percent. */
  rank_acceptability: number[][];
  first_rank_counts: number[];
  central: (number[] | null)[];
  confidence: (number | null)[];
  barycenter: number[];
  pref_strict: number[][];
  pref_indiff: number[][];
  epsilon_star: number | null;
  epsilon_freeze: number | null;
}

export interface ResultBundle {
  metadata: {
    tool: string;
    version: string;
    core_version: string;
    rng: string;
    seed: number;
    iterations: number;
    config: RunConfig;
    scale_mode: ScaleMode;
    case: Case;
    epsilon_star: number | null;
    epsilon_freeze: number | null;
    iterations_total: number;
    iterations_feasible: number;
    problem: ProblemFile;
    scale: CommonScale | null;
  };
  results: SmaaResults;
  approximations: {
    necessary: boolean[][];
    possible: boolean[][];
    /** `[best, worst]` rank, one-based. */
    extreme_ranks: ([number, number] | null)[];
  };
}

export interface ResultsResponse {
  status: RunStatus;
  revision: number;
  results_revision: number | null;
  stale: boolean;
  bundle: ResultBundle | null;
}

export interface StatusResponse {
  status: RunStatus;
  error: string | null;
  revision: number;
  results_revision: number | null;
  stale: boolean;
}

/** Body of a 422 answer to an incompatible statement. */
export interface IncompatibleStatement {
  error: string;
  epsilon_star: number | null;
  binding: StatementEntry[];
  revision: number;
}

export const BUNDLE_FILES = [
  "results.json",
  "rank_acceptability.csv",
  "preference_strict.csv",
  "preference_indifference.csv",
  "central_capacities.csv",
  "barycenter.csv",
  "extreme_ranks.csv",
  "scale.csv",
] as const;

export type BundleFile = (typeof BUNDLE_FILES)[number];
