import type { RequestState, SearchResponse } from "../types.js";
import type { ApiClient } from "../api.js";
import { errorMessage } from "../api.js";
import { escapeHtml, snippetToHtml } from "../render.js";

export interface ResultCard {
  docId: string;
  score: number;
  snippetHtml: string;
}

/** Cards in exactly the payload's order; snippet markers become <mark> spans. */
export function resultCards(response: SearchResponse): ResultCard[] {
  return response.hits.map((hit) => ({
    docId: hit.doc_id,
    score: hit.score,
    snippetHtml: snippetToHtml(hit.snippet),
  }));
}

export class SearchPanel {
  state: RequestState = { kind: "idle" };
  response: SearchResponse | null = null;
  private sequence = 0;

  constructor(private readonly api: ApiClient) {}

  async runSearch(query: string, k = 10): Promise<void> {
    if (!query.trim()) {
      return; // empty query is a no-op
    }
    const ticket = ++this.sequence;
    this.state = { kind: "loading" };
    try {
      const response = await this.api.search(query, k);
      if (ticket !== this.sequence) return;
      this.response = response;
      this.state = { kind: "idle" };
    } catch (error) {
      if (ticket !== this.sequence) return;
      this.state = { kind: "error", message: errorMessage(error) };
    }
  }

  render(): string {
    const box = `
      <form class="search-form" data-role="search-form">
        <input name="q" placeholder="search the corpus" value="${escapeHtml(this.response?.query ?? "")}" />
        <input name="k" type="number" value="${this.response?.k ?? 10}" min="1" />
        <button type="submit">search</button>
      </form>`;
    if (this.state.kind === "error") {
      return `${box}<div class="error-inline">${escapeHtml(this.state.message)}</div>`;
    }
    if (this.state.kind === "loading") {
      return `${box}<p class="loading">searching…</p>`;
    }
    if (!this.response) {
      return box;
    }
    const cards = resultCards(this.response);
    if (cards.length === 0) {
      return `${box}<p class="no-results">no results</p>`;
    }
    const items = cards
      .map(
        (card) => `
        <li class="hit" data-doc-id="${escapeHtml(card.docId)}">
          <span class="doc-id">${escapeHtml(card.docId)}</span>
          <span class="score" data-score="${card.score}">${card.score}</span>
          <p class="snippet">${card.snippetHtml}</p>
        </li>`,
      )
      .join("");
    return `${box}<ol class="hits">${items}</ol>`;
  }
}
