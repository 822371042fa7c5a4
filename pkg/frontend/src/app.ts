/** Browser controller: wires the API client, form state and renderers.
 *
 * One case per tab-session; conflicts from the service's optimistic locking
 * are surfaced as a reload-and-reapply prompt, never resolved silently.
 */

import { ApiClient, ConflictError, ApiRequestError, ServiceUnreachableError } from "./api.js";
import { efficiencyFromEditLog, perCaseEfficiency } from "./dashboard.js";
import {
  ReviewFormState,
  canSubmit,
  initForm,
  markConflict,
  markDone,
  markIdle,
  markSubmitting,
  rebase,
  setField,
  setLaterality,
  setVerdict,
  submissionPayload,
} from "./formState.js";
import {
  renderDashboard,
  renderErrorBanner,
  renderFinalReport,
  renderReviewForm,
  renderWorklist,
} from "./render.js";

export class ReviewApp {
  private form: ReviewFormState | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    await this.showWorklist();
  }

  private panel(id: string): HTMLElement {
    let element = this.root.querySelector<HTMLElement>(`#${id}`);
    if (!element) {
      element = document.createElement("div");
      element.id = id;
      this.root.appendChild(element);
    }
    return element;
  }

  async showWorklist(): Promise<void> {
    const panel = this.panel("worklist-panel");
    try {
      const cases = await this.client.worklist("unreviewed");
      panel.innerHTML = renderWorklist(cases);
      panel.querySelectorAll<HTMLButtonElement>(".open-case").forEach((button) => {
        button.addEventListener("click", () => {
          void this.openCase(button.dataset.caseId ?? "");
        });
      });
      await this.refreshDashboard();
    } catch (error) {
      if (error instanceof ServiceUnreachableError) {
        panel.innerHTML = renderErrorBanner(error.message);
        panel.querySelector(".retry")?.addEventListener("click", () => void this.showWorklist());
        return;
      }
      throw error;
    }
  }

  async openCase(caseId: string): Promise<void> {
    const { report } = await this.client.preliminary(caseId);
    this.form = initForm(report);
    this.renderForm();
  }

  private renderForm(): void {
    if (!this.form) return;
    const panel = this.panel("review-panel");
    panel.innerHTML = renderReviewForm(this.form);
    const formElement = panel.querySelector<HTMLFormElement>(".review-form");
    if (!formElement) return;

    formElement.querySelectorAll<HTMLInputElement>(".field-row input").forEach((input) => {
      input.addEventListener("input", () => {
        if (this.form) {
          this.form = setField(this.form, input.name, input.value);
          this.syncSubmitButton(formElement);
        }
      });
    });
    formElement.querySelectorAll<HTMLInputElement>("input[name=verdict]").forEach((radio) => {
      radio.addEventListener("change", () => {
        if (this.form && radio.checked) {
          this.form = setVerdict(this.form, radio.value as ReviewFormState["verdict"]);
          this.renderForm(); // mandatory-field highlighting depends on the verdict
        }
      });
    });
    formElement
      .querySelector<HTMLSelectElement>("select[name=laterality]")
      ?.addEventListener("change", (event) => {
        if (this.form) {
          const value = (event.target as HTMLSelectElement).value;
          this.form = setLaterality(this.form, value as ReviewFormState["laterality"]);
        }
      });
    formElement.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    formElement
      .querySelector(".reload-reapply")
      ?.addEventListener("click", () => void this.reloadAndReapply());
  }

  private syncSubmitButton(formElement: HTMLFormElement): void {
    const button = formElement.querySelector<HTMLButtonElement>(".submit-review");
    if (button && this.form) {
      button.disabled = !canSubmit(this.form);
    }
  }

  async submit(): Promise<void> {
    if (!this.form || !canSubmit(this.form)) return;
    this.form = markSubmitting(this.form);
    try {
      const response = await this.client.submitReview(
        this.form.caseId,
        submissionPayload(this.form),
      );
      this.form = markDone(this.form);
      const panel = this.panel("review-panel");
      panel.innerHTML =
        renderFinalReport(response.rendered) +
        `<p class="edit-count">${response.report.edit_log.length} field(s) changed; ` +
        `${efficiencyFromEditLog(response.report).unchanged}/${response.report.fields.length} left unchanged.</p>`;
      await this.showWorklist();
    } catch (error) {
      if (error instanceof ConflictError) {
        this.form = markConflict(this.form, error.currentVersion);
        this.renderForm();
        return;
      }
      if (error instanceof ApiRequestError && error.code === "validation") {
        this.form = markIdle(this.form);
        const panel = this.panel("review-panel");
        this.renderForm();
        panel.insertAdjacentHTML("beforeend", renderErrorBanner(error.message));
        return;
      }
      throw error;
    }
  }

  /** Conflict recovery: pull the current draft, replay the doctor's edits. */
  async reloadAndReapply(): Promise<void> {
    if (!this.form) return;
    const { report } = await this.client.preliminary(this.form.caseId);
    this.form = rebase(this.form, report);
    this.renderForm();
  }

  async refreshDashboard(): Promise<void> {
    const panel = this.panel("dashboard-panel");
    const summary = await this.client.metricsSummary();
    panel.innerHTML = renderDashboard(summary, perCaseEfficiency(summary));
  }
}
