import { describe, expect, it } from "vitest";

import { perCaseEfficiency, pooledEfficiency } from "../src/dashboard.js";
import { initForm, markConflict, setField, setVerdict } from "../src/formState.js";
import {
  renderConflictPrompt,
  renderDashboard,
  renderErrorBanner,
  renderReviewForm,
  renderWorklist,
} from "../src/render.js";
import type { MetricsSummary } from "../src/types.js";
import { benignPreliminary, malignantPreliminary } from "./fixtures.js";

describe("worklist", () => {
  it("renders one row per pending case", () => {
    const html = renderWorklist([
      { case_id: "a", triage: "lesion", review: "unreviewed", laterality: "left", version: 1 },
      { case_id: "b", triage: "lesion", review: "unreviewed", laterality: "right", version: 1 },
    ]);
    expect(html.match(/class="worklist-row"/g)).toHaveLength(2);
  });

  it("shows an empty-state message when there is nothing to review", () => {
    expect(renderWorklist([])).toContain("empty-state");
  });

  it("escapes case ids", () => {
    const html = renderWorklist([
      { case_id: "<img>", triage: "lesion", review: "unreviewed", laterality: "left", version: 1 },
    ]);
    expect(html).not.toContain("<img>");
    expect(html).toContain("&lt;img&gt;");
  });
});

describe("review form", () => {
  it("visually distinguishes predicted from default fields", () => {
    const html = renderReviewForm(initForm(benignPreliminary()));
    expect(html.match(/provenance-predicted/g)).toHaveLength(3);
    expect(html.match(/provenance-default/g)).toHaveLength(3);
    expect(html).toContain('value="oval/round"');
    expect(html).toContain('value="circumscribed"');
  });

  it("marks placeholder fields and disables submit on an empty malignant form", () => {
    const html = renderReviewForm(initForm(malignantPreliminary()));
    expect(html.match(/provenance-manual_placeholder/g)).toHaveLength(6);
    expect(html).toMatch(/<button type="submit"[^>]*disabled/);
  });

  it("enables submit once every malignant field is typed", () => {
    let form = initForm(malignantPreliminary());
    for (const field of form.fields) {
      form = setField(form, field.name, "typed");
    }
    expect(renderReviewForm(form)).not.toMatch(/<button type="submit"[^>]*disabled/);
  });

  it("keeps a filled benign form submittable after switching the verdict", () => {
    const form = setVerdict(initForm(benignPreliminary()), "malignant");
    expect(renderReviewForm(form)).not.toMatch(/<button type="submit"[^>]*disabled/);
  });

  it("offers a laterality selector", () => {
    const html = renderReviewForm(initForm(benignPreliminary()));
    expect(html).toContain('select name="laterality"');
    for (const side of ["left", "right", "unspecified"]) {
      expect(html).toContain(`value="${side}"`);
    }
  });

  it("shows the conflict prompt with the current version", () => {
    const form = markConflict(initForm(benignPreliminary()), 9);
    const html = renderReviewForm(form);
    expect(html).toContain("conflict-prompt");
    expect(html).toContain("version 9");
    expect(html).toContain("reload-reapply");
  });
});

describe("banners and dashboard", () => {
  it("error banner offers a retry", () => {
    const html = renderErrorBanner("service unreachable: connection refused");
    expect(html).toContain("error-banner");
    expect(html).toContain("retry");
  });

  it("conflict prompt copes with an unknown version", () => {
    expect(renderConflictPrompt(null)).toContain("a newer version");
  });

  it("dashboard shows the service's figure and per-case rows", () => {
    const summary: MetricsSummary = {
      efficiency_index: 5 / 6,
      finalized_benign_reports: 1,
      per_case: { "case-42": { unchanged: 5, total: 6 } },
    };
    const html = renderDashboard(summary, perCaseEfficiency(summary));
    expect(html).toContain("83.3%");
    expect(html).toContain("5/6");
  });

  it("client-side pooling agrees with the service figure", () => {
    const summary: MetricsSummary = {
      efficiency_index: 11 / 12,
      finalized_benign_reports: 2,
      per_case: {
        a: { unchanged: 5, total: 6 },
        b: { unchanged: 6, total: 6 },
      },
    };
    expect(pooledEfficiency(summary)).toBeCloseTo(summary.efficiency_index ?? 0, 12);
  });

  it("pooling an empty summary yields null", () => {
    expect(
      pooledEfficiency({ efficiency_index: null, finalized_benign_reports: 0, per_case: {} }),
    ).toBeNull();
  });
});
