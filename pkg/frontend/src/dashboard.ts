/** Work-efficiency dashboard math.
 *
 * The headline figure is always the service's own metrics/summary value;
 * the helpers here only re-derive per-case and pooled numbers for display,
 * so the dashboard can show that the two agree.
 */

import type { FinalReportWire, MetricsSummary } from "./types.js";

export interface CaseEfficiency {
  caseId: string;
  unchanged: number;
  total: number;
}

export function perCaseEfficiency(summary: MetricsSummary): CaseEfficiency[] {
  return Object.entries(summary.per_case)
    .map(([caseId, counts]) => ({ caseId, unchanged: counts.unchanged, total: counts.total }))
    .sort((a, b) => (a.caseId < b.caseId ? -1 : a.caseId > b.caseId ? 1 : 0));
}

/** Pooled unchanged/total over the summary's cases (the service's formula). */
export function pooledEfficiency(summary: MetricsSummary): number | null {
  let unchanged = 0;
  let total = 0;
  for (const counts of Object.values(summary.per_case)) {
    unchanged += counts.unchanged;
    total += counts.total;
  }
  return total === 0 ? null : unchanged / total;
}

/** Per-case figure straight from a final report's edit log. */
export function efficiencyFromEditLog(report: FinalReportWire): CaseEfficiency {
  const total = report.fields.length;
  return {
    caseId: report.case_id,
    unchanged: total - report.edit_log.length,
    total,
  };
}
