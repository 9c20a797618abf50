// Small HTML-string helpers shared by the panels. Panels render to strings
// so tests can assert on output without a DOM.

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Escape, then turn [[term]] markers into highlight spans. */
export function snippetToHtml(snippet: string): string {
  return escapeHtml(snippet).replace(/\[\[(.+?)\]\]/g, "<mark>$1</mark>");
}

export function formatNumber(value: number): string {
  // Exact passthrough for integers; short fixed form for floats. The raw
  // value is also emitted in a data attribute wherever fidelity matters.
  return Number.isInteger(value) ? String(value) : value.toPrecision(6);
}

/** Proportional bar width for display; the displayed number stays verbatim. */
export function barWidthPercent(count: number, maxCount: number): number {
  if (maxCount <= 0) return 0;
  return Math.max(0, Math.min(100, (count / maxCount) * 100));
}
