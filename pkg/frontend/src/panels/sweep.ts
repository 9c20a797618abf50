import type { OperatorInfo, RequestState, SweepRequest, SweepResult } from "../types.js";
import type { ApiClient } from "../api.js";
import { errorMessage } from "../api.js";
import { barWidthPercent, escapeHtml, formatNumber } from "../render.js";

export interface SweepPoint {
  value: number;
  ratio: number; // verbatim filter_ratio from the payload
}

export function sweepPoints(result: SweepResult): SweepPoint[] {
  return result.values.map((value, i) => ({ value, ratio: result.filter_ratios[i] ?? 0 }));
}

/**
 * Write a swept value into the config buffer, touching only that parameter.
 * Replaces the first `param: <value>` occurrence; appends a stage snippet
 * when the parameter is not in the buffer yet.
 */
export function applyParamToConfig(
  configText: string,
  filterName: string,
  param: string,
  value: number,
): string {
  const pattern = new RegExp(`(\\b${param.replace(/[.*+?^${}()|[\]\\]/g, "\\$&")}\\s*:\\s*)([^,}\\n#]*)`);
  if (pattern.test(configText)) {
    return configText.replace(pattern, (_m, prefix: string) => `${prefix}${value}`);
  }
  const snippet = `\n  - operator: ${filterName}\n    params: {${param}: ${value}}\n`;
  return configText + snippet;
}

export function parseValueGrid(text: string): number[] {
  return text
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part.length > 0)
    .map(Number)
    .filter((n) => Number.isFinite(n));
}

export class SweepPanel {
  state: RequestState = { kind: "idle" };
  operators: OperatorInfo[] = [];
  result: SweepResult | null = null;
  onApply: ((filterName: string, param: string, value: number) => void) | null = null;
  private sequence = 0;

  constructor(private readonly api: ApiClient) {}

  async loadOperators(): Promise<void> {
    try {
      this.operators = (await this.api.operators()).filter((op) => op.kind === "filter");
    } catch (error) {
      this.state = { kind: "error", message: errorMessage(error) };
    }
  }

  /** Latest-wins: responses for superseded requests are dropped. */
  async runSweep(request: SweepRequest): Promise<void> {
    const ticket = ++this.sequence;
    this.state = { kind: "loading" };
    try {
      const result = await this.api.sweep(request);
      if (ticket !== this.sequence) return; // stale response
      this.result = result;
      this.state = { kind: "idle" };
    } catch (error) {
      if (ticket !== this.sequence) return;
      this.state = { kind: "error", message: errorMessage(error) };
    }
  }

  apply(value: number): void {
    if (this.result && this.onApply) {
      this.onApply(this.result.filter_name, this.result.param_name, value);
    }
  }

  render(): string {
    const options = this.operators
      .map((op) => `<option value="${escapeHtml(op.name)}">${escapeHtml(op.name)}</option>`)
      .join("");
    const form = `
      <form class="sweep-form" data-role="sweep-form">
        <select name="filter">${options}</select>
        <input name="param" placeholder="parameter" />
        <input name="values" placeholder="values, e.g. 1,2,3,4" />
        <input name="sample" type="number" value="1000" />
        <input name="seed" type="number" value="0" />
        <button type="submit">sweep</button>
      </form>`;
    if (this.state.kind === "error") {
      return `${form}<div class="error-inline">${escapeHtml(this.state.message)}</div>`;
    }
    if (this.state.kind === "loading") {
      return `${form}<p class="loading">sweeping…</p>`;
    }
    if (!this.result) {
      return form;
    }
    const points = sweepPoints(this.result);
    const rows = points
      .map(
        (p) => `
        <tr>
          <td data-value="${p.value}">${formatNumber(p.value)}</td>
          <td class="ratio" data-ratio="${p.ratio}">${p.ratio}</td>
          <td class="bar-cell"><div class="bar" style="width:${barWidthPercent(p.ratio, 1)}%"></div></td>
          <td><button data-action="apply" data-value="${p.value}">apply to config</button></td>
        </tr>`,
      )
      .join("");
    return `${form}
      <h3>${escapeHtml(this.result.filter_name)} / ${escapeHtml(this.result.param_name)}</h3>
      <p>sample=${this.result.sample_size}, seed=${this.result.seed}</p>
      <table class="sweep-curve">
        <thead><tr><th>value</th><th>filter ratio</th><th></th><th></th></tr></thead>
        <tbody>${rows}</tbody>
      </table>`;
  }
}
