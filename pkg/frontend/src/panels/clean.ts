import type { CleanPreviewRequest, MatchCaseReport, RequestState } from "../types.js";
import type { ApiClient } from "../api.js";
import { errorMessage } from "../api.js";
import { escapeHtml } from "../render.js";

export class CleanPreviewPanel {
  state: RequestState = { kind: "idle" };
  report: MatchCaseReport | null = null;
  private sequence = 0;

  constructor(private readonly api: ApiClient) {}

  async preview(request: CleanPreviewRequest): Promise<void> {
    const ticket = ++this.sequence;
    this.state = { kind: "loading" };
    try {
      const report = await this.api.cleanPreview(request);
      if (ticket !== this.sequence) return;
      this.report = report;
      this.state = { kind: "idle" };
    } catch (error) {
      if (ticket !== this.sequence) return;
      // e.g. regex compile errors surface inline, straight from the API
      this.state = { kind: "error", message: errorMessage(error) };
    }
  }

  render(): string {
    const form = `
      <form class="rule-form" data-role="rule-form">
        <select name="scope">
          <option>string</option><option>line</option><option>paragraph</option>
        </select>
        <select name="matcher"><option>exact</option><option>regex</option></select>
        <input name="pattern" placeholder="pattern" />
        <select name="action"><option>remove</option><option>replace</option></select>
        <input name="replace_with" placeholder="replacement (for replace)" />
        <button type="submit">preview</button>
      </form>`;
    if (this.state.kind === "error") {
      return `${form}<div class="error-inline">${escapeHtml(this.state.message)}</div>`;
    }
    if (this.state.kind === "loading") {
      return `${form}<p class="loading">previewing…</p>`;
    }
    if (!this.report) {
      return form;
    }
    const cases = this.report.cases
      .map(
        (c) => `
        <li class="case" data-doc-id="${escapeHtml(c.doc_id)}" data-start="${c.start}" data-end="${c.end}">
          <span class="doc-id">${escapeHtml(c.doc_id)}</span>
          <span class="span">[${c.start}, ${c.end})</span>
          <code class="context">${escapeHtml(c.context)}</code>
        </li>`,
      )
      .join("");
    return `${form}
      <p class="total">matches in sample:
        <span data-total-matches="${this.report.total_matches}">${this.report.total_matches}</span>
        (sample=${this.report.sample_size}, seed=${this.report.seed})
      </p>
      ${cases ? `<ul class="cases">${cases}</ul>` : `<p class="no-results">no match cases</p>`}`;
  }
}
