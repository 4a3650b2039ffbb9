import type { CompatibilityReport, ResultsResponse, Session } from "./types";

/** Everything the session page renders, straight from service answers. */
export interface SessionView {
  session: Session;
  compatibility: CompatibilityReport | null;
  results: ResultsResponse | null;
  /** Last 409/422/network message, shown without discarding state. */
  notice: string | null;
}

/** Cell text for a percentage: the service value to two decimals. */
export function percent(value: number): string {
  return value.toFixed(2);
}

/** Heatmap shade for a percentage on a fixed 0-100 scale. */
export function heat(value: number): string {
  const t = Math.min(Math.max(value, 0), 100) / 100;
  return `rgba(200, 60, 30, ${t.toFixed(3)})`;
}

export function compatibilityBadge(report: CompatibilityReport | null): string {
  if (!report) return "epsilon* unknown";
  const eps = report.epsilon_star === null ? "none" : report.epsilon_star.toFixed(4);
  return `${report.compatible ? "compatible" : "incompatible"} (epsilon* = ${eps})`;
}

/** Stale when results exist but were computed from an older revision. */
export function isStale(view: SessionView): boolean {
  return view.results?.stale ?? false;
}

/** Row order for sorting by one acceptability column (rank is one-based). */
export function sortByRank(results: ResultsResponse, rank: number): number[] {
  const b = results.bundle?.results.rank_acceptability ?? [];
  return b.map((_, k) => k).sort((x, y) => b[y][rank - 1] - b[x][rank - 1]);
}
