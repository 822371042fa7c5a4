/** Wire types mirroring the review service's JSON bodies. */

export type ReviewStateToken = "unreviewed" | "preliminary_issued" | "finalized";
export type RouteToken = "normal_conclusion" | "benign_auto" | "malignant_manual";
export type ProvenanceToken = "predicted" | "default" | "manual_placeholder";
export type VerdictToken = "normal" | "benign" | "malignant";
export type LateralityToken = "left" | "right" | "unspecified";

export interface CaseSummary {
  case_id: string;
  triage: string;
  review: ReviewStateToken;
  laterality: LateralityToken;
  version: number;
}

export interface ReportFieldWire {
  name: string;
  value: string;
  provenance: ProvenanceToken;
}

export interface PreliminaryReportWire {
  case_id: string;
  route: RouteToken;
  verdict_score: number;
  fields: ReportFieldWire[];
  laterality: LateralityToken;
  created_at: number;
  base_version: number;
}

export interface EditEntryWire {
  field: string;
  old: string;
  new: string;
  at: number;
}

export interface FinalReportWire extends PreliminaryReportWire {
  final_verdict: VerdictToken;
  final_fields: { name: string; value: string }[];
  edit_log: EditEntryWire[];
  reviewer: string;
}

export interface PreliminaryResponse {
  report: PreliminaryReportWire;
  rendered: string;
}

export interface ReviewResponse {
  report: FinalReportWire;
  rendered: string;
}

export interface MetricsSummary {
  efficiency_index: number | null;
  finalized_benign_reports: number;
  per_case: Record<string, { unchanged: number; total: number }>;
}

export interface RocPayload {
  auc: number;
  points: [number, number][];
}

export interface ApiErrorBody {
  error: {
    code: "not_found" | "conflict" | "validation" | "internal";
    message: string;
    details: Record<string, unknown>;
  };
}

export interface ReviewSubmission {
  edits: Record<string, string>;
  final_verdict: VerdictToken;
  base_version: number;
}
