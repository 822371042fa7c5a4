/** HTML renderers: pure string builders so every view is testable headless.
 *
 * Provenance is a first-class visual: predicted, default and
 * manual-placeholder fields each get their own style hook, because the whole
 * point of the draft is that the doctor can triage at a glance what the
 * machine filled in.
 */

import type { CaseEfficiency } from "./dashboard.js";
import type { ReviewFormState } from "./formState.js";
import { canSubmit, missingMandatoryFields } from "./formState.js";
import type { CaseSummary, MetricsSummary } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const FIELD_LABELS: Record<string, string> = {
  shape: "Shape",
  internal_echo: "Internal echo",
  posterior_acoustic: "Posterior acoustic",
  boundary: "Boundary",
  orientation: "Orientation",
  margin: "Margin",
};

export function renderWorklist(cases: CaseSummary[]): string {
  if (cases.length === 0) {
    return `<p class="empty-state">No pending cases. All caught up.</p>`;
  }
  const rows = cases
    .map(
      (c) => `
      <tr class="worklist-row" data-case-id="${escapeHtml(c.case_id)}">
        <td>${escapeHtml(c.case_id)}</td>
        <td>${escapeHtml(c.triage)}</td>
        <td>${escapeHtml(c.review)}</td>
        <td>v${c.version}</td>
        <td><button class="open-case" data-case-id="${escapeHtml(c.case_id)}">Open</button></td>
      </tr>`,
    )
    .join("");
  return `
    <table class="worklist">
      <thead><tr><th>Case</th><th>Triage</th><th>Review</th><th>Version</th><th></th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}

export function renderErrorBanner(message: string): string {
  return `
    <div class="error-banner" role="alert">
      <span>${escapeHtml(message)}</span>
      <button class="retry">Retry</button>
    </div>`;
}

export function renderConflictPrompt(currentVersion: number | null): string {
  const version = currentVersion === null ? "a newer version" : `version ${currentVersion}`;
  return `
    <div class="conflict-prompt" role="alertdialog">
      <p>This case moved to ${escapeHtml(String(version))} while you were editing.
      Reload the draft and your edits will be re-applied on top.</p>
      <button class="reload-reapply">Reload and re-apply my edits</button>
    </div>`;
}

export function renderReviewForm(form: ReviewFormState): string {
  const missing = new Set(form.verdict === "malignant" ? missingMandatoryFields(form) : []);
  const fieldRows = form.fields
    .map((field) => {
      const label = FIELD_LABELS[field.name] ?? field.name;
      const classes = [
        "field-row",
        `provenance-${field.provenance}`,
        field.dirty ? "dirty" : "clean",
        missing.has(field.name) ? "missing" : "",
      ]
        .filter(Boolean)
        .join(" ");
      const placeholder =
        field.provenance === "manual_placeholder" ? ` placeholder="type the descriptor"` : "";
      return `
      <label class="${classes}">
        <span class="field-label">${escapeHtml(label)}</span>
        <input name="${escapeHtml(field.name)}" value="${escapeHtml(field.value)}"${placeholder} />
        <span class="provenance-tag">${escapeHtml(field.provenance.replace("_", " "))}</span>
      </label>`;
    })
    .join("");

  const verdicts = (["benign", "malignant", "normal"] as const)
    .map(
      (v) => `
      <label><input type="radio" name="verdict" value="${v}" ${
        form.verdict === v ? "checked" : ""
      } /> ${v}</label>`,
    )
    .join("");
  const lateralities = (["left", "right", "unspecified"] as const)
    .map(
      (side) => `
      <option value="${side}" ${form.laterality === side ? "selected" : ""}>${side}</option>`,
    )
    .join("");

  const disabled = canSubmit(form) ? "" : "disabled";
  const conflict =
    form.phase === "conflict" ? renderConflictPrompt(form.conflictVersion) : "";
  return `
    <form class="review-form" data-case-id="${escapeHtml(form.caseId)}" data-base-version="${form.baseVersion}">
      <h2>Case ${escapeHtml(form.caseId)} <small>(${escapeHtml(form.route)})</small></h2>
      <label class="laterality">Laterality
        <select name="laterality">${lateralities}</select>
      </label>
      <div class="fields">${fieldRows}</div>
      <fieldset class="verdict">${verdicts}</fieldset>
      ${conflict}
      <button type="submit" class="submit-review" ${disabled}>Submit final report</button>
    </form>`;
}

export function renderFinalReport(rendered: string): string {
  return `<pre class="final-report">${escapeHtml(rendered)}</pre>`;
}

export function renderDashboard(
  summary: MetricsSummary,
  perCase: CaseEfficiency[],
): string {
  const headline =
    summary.efficiency_index === null
      ? "no finalized benign reports yet"
      : `${(summary.efficiency_index * 100).toFixed(1)}% of drafted fields left unchanged`;
  const rows = perCase
    .map(
      (c) => `
      <tr><td>${escapeHtml(c.caseId)}</td><td>${c.unchanged}/${c.total}</td></tr>`,
    )
    .join("");
  return `
    <section class="dashboard">
      <h2>Work efficiency</h2>
      <p class="headline">${escapeHtml(headline)}</p>
      <table class="per-case"><thead><tr><th>Case</th><th>Unchanged</th></tr></thead>
      <tbody>${rows}</tbody></table>
    </section>`;
}
