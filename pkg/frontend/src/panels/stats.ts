import type { CorpusStats, DiffReport, FeatureStats, RequestState } from "../types.js";
import type { ApiClient } from "../api.js";
import { errorMessage } from "../api.js";
import { barWidthPercent, escapeHtml, formatNumber } from "../render.js";

export interface HistogramRow {
  binStart: number;
  binEnd: number;
  count: number; // verbatim payload count
  delta: number | null; // verbatim diff payload delta, when overlaid
}

/** Rows for one feature histogram; counts/deltas are copied, never derived. */
export function histogramRows(feature: FeatureStats, deltas?: number[] | null): HistogramRow[] {
  return feature.histogram.counts.map((count, i) => ({
    binStart: feature.histogram.edges[i] ?? 0,
    binEnd: feature.histogram.edges[i + 1] ?? 0,
    count,
    delta: deltas ? (deltas[i] ?? 0) : null,
  }));
}

export function languageRows(stats: CorpusStats): Array<{ tag: string; count: number }> {
  if (!stats.languages) return [];
  return Object.entries(stats.languages).map(([tag, count]) => ({ tag, count }));
}

function featureSection(title: string, feature: FeatureStats, deltas?: number[] | null): string {
  const rows = histogramRows(feature, deltas);
  const maxCount = Math.max(...feature.histogram.counts, 1);
  const axis = feature.histogram.log_scale ? "log" : "linear";
  const body = rows
    .map(
      (row) => `
      <tr>
        <td class="bin">${formatNumber(row.binStart)} to ${formatNumber(row.binEnd)}</td>
        <td class="count" data-count="${row.count}">${row.count}</td>
        <td class="bar-cell"><div class="bar" style="width:${barWidthPercent(row.count, maxCount)}%"></div></td>
        ${row.delta === null ? "" : `<td class="delta" data-delta="${row.delta}">${row.delta >= 0 ? "+" : ""}${row.delta}</td>`}
      </tr>`,
    )
    .join("");
  return `
  <section class="feature" data-axis="${axis}">
    <h3>${escapeHtml(title)}</h3>
    <p class="moments">
      n=<span data-count="${feature.count}">${feature.count}</span>,
      mean=<span data-mean="${feature.mean}">${formatNumber(feature.mean)}</span>,
      std=<span data-std="${feature.std}">${formatNumber(feature.std)}</span>
    </p>
    <table class="histogram${feature.histogram.log_scale ? " log-scale" : ""}">
      <thead><tr><th>bin</th><th>count</th><th>bar</th>${deltas ? "<th>Δ</th>" : ""}</tr></thead>
      <tbody>${body}</tbody>
    </table>
  </section>`;
}

export function renderStats(stats: CorpusStats, diff?: DiffReport | null): string {
  const parts: string[] = [
    `<p class="totals">documents: <span data-doc-count="${stats.doc_count}">${stats.doc_count}</span>,
      characters: <span data-total-chars="${stats.total_chars}">${stats.total_chars}</span></p>`,
  ];
  if (stats.length) {
    parts.push(featureSection("Text length", stats.length, diff?.features["length"]?.bin_deltas));
  }
  if (stats.perplexity) {
    parts.push(
      featureSection("Perplexity", stats.perplexity, diff?.features["perplexity"]?.bin_deltas),
    );
  }
  const langs = languageRows(stats);
  if (langs.length) {
    const rows = langs
      .map(
        (l) =>
          `<tr><td>${escapeHtml(l.tag)}</td><td data-count="${l.count}">${l.count}</td></tr>`,
      )
      .join("");
    parts.push(`<section class="languages"><h3>Languages</h3><table><tbody>${rows}</tbody></table></section>`);
  }
  if (diff) {
    parts.push(
      `<p class="diff-summary">vs raw: documents ${diff.doc_count_delta >= 0 ? "+" : ""}${diff.doc_count_delta},
        characters ${diff.total_chars_delta >= 0 ? "+" : ""}${diff.total_chars_delta}</p>`,
    );
  }
  return `<div class="stats-panel">${parts.join("\n")}</div>`;
}

export class StatsPanel {
  state: RequestState = { kind: "idle" };
  stats: CorpusStats | null = null;
  diff: DiffReport | null = null;

  constructor(private readonly api: ApiClient) {}

  async load(): Promise<void> {
    this.state = { kind: "loading" };
    try {
      this.stats = await this.api.stats();
      this.state = { kind: "idle" };
    } catch (error) {
      this.state = { kind: "error", message: errorMessage(error) };
    }
  }

  async loadDiff(rawPath: string, refinedPath: string): Promise<void> {
    try {
      this.diff = await this.api.statsDiff(rawPath, refinedPath);
    } catch (error) {
      this.state = { kind: "error", message: errorMessage(error) };
    }
  }

  render(): string {
    if (this.state.kind === "error") {
      return `<div class="error-banner">${escapeHtml(this.state.message)} <button data-action="retry">retry</button></div>`;
    }
    if (this.state.kind === "loading" || !this.stats) {
      return `<p class="loading">loading…</p>`;
    }
    return renderStats(this.stats, this.diff);
  }
}
