// Meta-annotator rating form: three 1-5 sliders with 0.1 steps (fractional
// scores are expected), plus a 1-10 score input in quality-assessment mode.
// Out-of-range values are blocked client-side; the server re-validates.

import { ApiClient, ApiError, SessionView } from "./api.js";

const FACTORS = ["coverage", "relevance", "diversity"] as const;
type Factor = (typeof FACTORS)[number];

export interface RatingCallbacks {
  onSubmitted?: (count: number) => void;
}

export class RatingForm {
  private root: HTMLElement;
  private client: ApiClient;
  private view: SessionView;
  private callbacks: RatingCallbacks;
  private doc: Document;

  constructor(root: HTMLElement, client: ApiClient, view: SessionView,
              callbacks: RatingCallbacks = {}) {
    this.root = root;
    this.client = client;
    this.view = view;
    this.callbacks = callbacks;
    this.doc = root.ownerDocument;
    this.render();
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
  }

  value(factor: Factor): number {
    const input = this.root.querySelector(
      `input[name="${factor}"]`) as HTMLInputElement;
    return Number(input.value);
  }

  qaValue(): number | undefined {
    const input = this.root.querySelector(
      'input[name="qa_score"]') as HTMLInputElement | null;
    if (!input || input.value === "") return undefined;
    return Number(input.value);
  }

  validate(): string | null {
    for (const factor of FACTORS) {
      const v = this.value(factor);
      if (!Number.isFinite(v) || v < 1 || v > 5) {
        return `${factor} must be between 1 and 5`;
      }
    }
    const qa = this.qaValue();
    if (qa !== undefined && (!Number.isFinite(qa) || qa < 1 || qa > 10)) {
      return "qa score must be between 1 and 10";
    }
    return null;
  }

  async submit(): Promise<void> {
    const status = this.root.querySelector(".rating-status") as HTMLElement;
    const problem = this.validate();
    if (problem) {
      status.textContent = `blocked: ${problem}`;
      status.dataset.kind = "blocked";
      return;
    }
    const rater = (this.root.querySelector(
      'input[name="rater_id"]') as HTMLInputElement).value || "meta";
    try {
      const result = await this.client.submitRating(this.view.session_id, {
        rater_id: rater,
        coverage: this.value("coverage"),
        relevance: this.value("relevance"),
        diversity: this.value("diversity"),
        qa_score: this.qaValue(),
      });
      status.textContent = `saved (${result.count} rating(s) on this summary)`;
      status.dataset.kind = "saved";
      this.callbacks.onSubmitted?.(result.count);
    } catch (err) {
      status.dataset.kind = "error";
      status.textContent = err instanceof ApiError
        ? err.message
        : "network failure: could not reach the service";
    }
  }

  render(): void {
    this.root.textContent = "";
    this.root.append(this.el("h2", "", "Rate this summary"));
    this.root.append(this.el("p", "rating-help",
      "Score coverage, relevance and diversity from 1 (worst) to 5 (best); " +
      "fractional scores like 4.7 are fine."));

    const rater = this.el("label", "rater", "Rater id ");
    const raterInput = this.el("input") as HTMLInputElement;
    raterInput.name = "rater_id";
    raterInput.value = "meta";
    rater.append(raterInput);
    this.root.append(rater);

    for (const factor of FACTORS) {
      const row = this.el("div", "factor-row");
      row.append(this.el("label", "", factor));
      const slider = this.el("input") as HTMLInputElement;
      slider.type = "range";
      slider.name = factor;
      slider.min = "1";
      slider.max = "5";
      slider.step = "0.1";
      slider.value = "3";
      const display = this.el("output", "factor-value", "3.0");
      slider.addEventListener("input", () => {
        display.textContent = Number(slider.value).toFixed(1);
      });
      row.append(slider);
      row.append(display);
      this.root.append(row);
    }

    if (this.view.mode === "QualityAssessment") {
      const row = this.el("div", "factor-row qa-row");
      row.append(this.el("label", "", "overall quality (1-10)"));
      const qa = this.el("input") as HTMLInputElement;
      qa.type = "number";
      qa.name = "qa_score";
      qa.min = "1";
      qa.max = "10";
      qa.step = "0.1";
      row.append(qa);
      this.root.append(row);
    }

    const submit = this.el("button", "submit-rating", "Submit rating");
    submit.addEventListener("click", () => void this.submit());
    this.root.append(submit);
    this.root.append(this.el("div", "rating-status"));
  }
}
