/** Pure review-form state: dirty tracking, gating, submission payloads.
 *
 * Two promises the UI makes and this module enforces:
 *  - it never fabricates a value: only fields the doctor actually changed
 *    (dirty) appear in the submission, carrying exactly the typed string;
 *  - a malignant verdict cannot be submitted while any field is empty.
 */

import type {
  LateralityToken,
  PreliminaryReportWire,
  ProvenanceToken,
  ReviewSubmission,
  RouteToken,
  VerdictToken,
} from "./types.js";

export interface FieldState {
  name: string;
  /** value the service drafted (placeholders are empty strings) */
  preliminaryValue: string;
  /** current editor content */
  value: string;
  provenance: ProvenanceToken;
  dirty: boolean;
}

export type SubmissionPhase = "idle" | "submitting" | "conflict" | "done";

export interface ReviewFormState {
  caseId: string;
  route: RouteToken;
  baseVersion: number;
  laterality: LateralityToken;
  fields: FieldState[];
  verdict: VerdictToken;
  phase: SubmissionPhase;
  /** version the store reported during a conflict, for the reload prompt */
  conflictVersion: number | null;
}

function defaultVerdict(route: RouteToken): VerdictToken {
  if (route === "normal_conclusion") return "normal";
  if (route === "malignant_manual") return "malignant";
  return "benign";
}

export function initForm(report: PreliminaryReportWire): ReviewFormState {
  return {
    caseId: report.case_id,
    route: report.route,
    baseVersion: report.base_version,
    laterality: report.laterality,
    fields: report.fields.map((field) => ({
      name: field.name,
      preliminaryValue: field.value,
      value: field.value,
      provenance: field.provenance,
      dirty: false,
    })),
    verdict: defaultVerdict(report.route),
    phase: "idle",
    conflictVersion: null,
  };
}

export function setField(form: ReviewFormState, name: string, value: string): ReviewFormState {
  const fields = form.fields.map((field) =>
    field.name === name
      ? { ...field, value, dirty: value !== field.preliminaryValue }
      : field,
  );
  if (!form.fields.some((field) => field.name === name)) {
    throw new Error(`unknown field ${name}`);
  }
  return { ...form, fields };
}

export function setVerdict(form: ReviewFormState, verdict: VerdictToken): ReviewFormState {
  return { ...form, verdict };
}

export function setLaterality(form: ReviewFormState, laterality: LateralityToken): ReviewFormState {
  return { ...form, laterality };
}

/** Fields that block submission under the current verdict. */
export function missingMandatoryFields(form: ReviewFormState): string[] {
  if (form.verdict === "normal") return [];
  return form.fields.filter((field) => field.value === "").map((field) => field.name);
}

export function canSubmit(form: ReviewFormState): boolean {
  if (form.phase === "submitting" || form.phase === "done") return false;
  if (form.verdict === "malignant" && missingMandatoryFields(form).length > 0) return false;
  return true;
}

/** Exactly the dirty fields, byte-for-byte as typed; nothing else. */
export function submissionPayload(form: ReviewFormState): ReviewSubmission {
  const edits: Record<string, string> = {};
  for (const field of form.fields) {
    if (field.dirty) {
      edits[field.name] = field.value;
    }
  }
  return { edits, final_verdict: form.verdict, base_version: form.baseVersion };
}

export function markSubmitting(form: ReviewFormState): ReviewFormState {
  return { ...form, phase: "submitting" };
}

export function markDone(form: ReviewFormState): ReviewFormState {
  return { ...form, phase: "done", conflictVersion: null };
}

export function markConflict(form: ReviewFormState, currentVersion: number | null): ReviewFormState {
  return { ...form, phase: "conflict", conflictVersion: currentVersion };
}

export function markIdle(form: ReviewFormState): ReviewFormState {
  return { ...form, phase: "idle", conflictVersion: null };
}

/** Conflict recovery: adopt the freshly fetched preliminary, replay the
 * doctor's dirty edits on top. Nothing typed is lost. */
export function rebase(form: ReviewFormState, fresh: PreliminaryReportWire): ReviewFormState {
  let next = initForm(fresh);
  next = { ...next, verdict: form.verdict, laterality: form.laterality };
  for (const field of form.fields) {
    if (field.dirty && next.fields.some((f) => f.name === field.name)) {
      next = setField(next, field.name, field.value);
    }
  }
  return next;
}
