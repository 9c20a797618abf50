import { HttpApiClient } from "./api.js";
import { CleanPreviewPanel } from "./panels/clean.js";
import { ConfigEditor } from "./panels/config.js";
import { SearchPanel } from "./panels/search.js";
import { StatsPanel } from "./panels/stats.js";
import { SweepPanel, applyParamToConfig, parseValueGrid } from "./panels/sweep.js";

type PanelName = "stats" | "search" | "sweep" | "clean" | "config";

const PANELS: PanelName[] = ["stats", "search", "sweep", "clean", "config"];

declare global {
  interface Window {
    GARDEN_API_BASE?: string;
  }
}

export function mountApp(root: HTMLElement): void {
  const api = new HttpApiClient(window.GARDEN_API_BASE ?? "");
  const stats = new StatsPanel(api);
  const search = new SearchPanel(api);
  const sweep = new SweepPanel(api);
  const clean = new CleanPreviewPanel(api);
  const config = new ConfigEditor(api);

  sweep.onApply = (filterName, param, value) => {
    config.setParam((text) => applyParamToConfig(text, filterName, param, value));
    location.hash = "#/config";
  };

  function currentPanel(): PanelName {
    const name = location.hash.replace(/^#\//, "") as PanelName;
    return PANELS.includes(name) ? name : "stats";
  }

  function nav(): string {
    const active = currentPanel();
    return `<nav>${PANELS.map(
      (p) => `<a href="#/${p}" class="${p === active ? "active" : ""}">${p}</a>`,
    ).join(" ")}</nav>`;
  }

  function render(): void {
    const panel = currentPanel();
    const body = {
      stats: () => stats.render(),
      search: () => search.render(),
      sweep: () => sweep.render(),
      clean: () => clean.render(),
      config: () => config.render(),
    }[panel]();
    root.innerHTML = `${nav()}<main data-panel="${panel}">${body}</main>`;
    bind(panel);
  }

  function bind(panel: PanelName): void {
    if (panel === "stats") {
      root.querySelector('[data-action="retry"]')?.addEventListener("click", () => {
        void stats.load().then(render);
      });
    }
    if (panel === "search") {
      root.querySelector('[data-role="search-form"]')?.addEventListener("submit", (event) => {
        event.preventDefault();
        const form = event.target as HTMLFormElement;
        const q = (form.elements.namedItem("q") as HTMLInputElement).value;
        const k = Number((form.elements.namedItem("k") as HTMLInputElement).value) || 10;
        void search.runSearch(q, k).then(render);
        render();
      });
    }
    if (panel === "sweep") {
      root.querySelector('[data-role="sweep-form"]')?.addEventListener("submit", (event) => {
        event.preventDefault();
        const form = event.target as HTMLFormElement;
        const read = (name: string) => (form.elements.namedItem(name) as HTMLInputElement).value;
        void sweep
          .runSweep({
            filter: read("filter"),
            param: read("param"),
            values: parseValueGrid(read("values")),
            sample: Number(read("sample")) || 1000,
            seed: Number(read("seed")) || 0,
          })
          .then(render);
        render();
      });
      root.querySelectorAll('[data-action="apply"]').forEach((button) => {
        button.addEventListener("click", () => {
          sweep.apply(Number((button as HTMLElement).dataset["value"]));
        });
      });
    }
    if (panel === "clean") {
      root.querySelector('[data-role="rule-form"]')?.addEventListener("submit", (event) => {
        event.preventDefault();
        const form = event.target as HTMLFormElement;
        const read = (name: string) =>
          (form.elements.namedItem(name) as HTMLInputElement | HTMLSelectElement).value;
        void clean
          .preview({
            rule: {
              scope: read("scope"),
              matcher: read("matcher"),
              pattern: read("pattern"),
              action: read("action"),
              replace_with: read("replace_with"),
            },
          })
          .then(render);
        render();
      });
    }
    if (panel === "config") {
      const textarea = root.querySelector('[data-role="config-buffer"]') as HTMLTextAreaElement | null;
      textarea?.addEventListener("input", () => {
        config.buffer = textarea.value;
      });
      root.querySelector('[data-action="validate"]')?.addEventListener("click", () => {
        void config.validate().then(render);
      });
      root.querySelector('[data-action="save"]')?.addEventListener("click", () => {
        void config.save().then(render);
      });
      root.querySelector('[data-action="run"]')?.addEventListener("click", () => {
        const input = prompt("input corpus path") ?? "";
        const output = prompt("output path") ?? "";
        if (!input || !output) return;
        void config.runPipeline({ input, output }).then(render);
        render(); // re-render immediately so the run button shows disabled
      });
      root.querySelector('[data-action="retry"]')?.addEventListener("click", () => {
        void config.load().then(render);
      });
    }
  }

  window.addEventListener("hashchange", render);

  void Promise.allSettled([stats.load(), sweep.loadOperators(), config.load()]).then(render);
  render();
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    mountApp(root);
  }
}
