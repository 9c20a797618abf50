import type { PipelineRunRequest, RequestState, RunStatus } from "../types.js";
import type { ApiClient } from "../api.js";
import { errorMessage } from "../api.js";
import { escapeHtml } from "../render.js";

const POLL_INTERVAL_MS = 500;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class ConfigEditor {
  state: RequestState = { kind: "idle" };
  buffer = "";
  version = 0;
  path = "";
  validationMessage = "";
  runActive = false;
  lastRun: RunStatus | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly pollInterval = POLL_INTERVAL_MS,
  ) {}

  async load(): Promise<void> {
    this.state = { kind: "loading" };
    try {
      const config = await this.api.getConfig();
      this.buffer = config.content;
      this.version = config.version;
      this.path = config.path;
      this.state = { kind: "idle" };
    } catch (error) {
      this.state = { kind: "error", message: errorMessage(error) };
    }
  }

  async validate(): Promise<boolean> {
    try {
      await this.api.putConfig(this.buffer, true);
      this.validationMessage = "config is valid";
      return true;
    } catch (error) {
      this.validationMessage = errorMessage(error);
      return false;
    }
  }

  /** Save writes a new config version, then reloads it from the service. */
  async save(): Promise<boolean> {
    try {
      await this.api.putConfig(this.buffer);
      await this.load();
      this.validationMessage = `saved as version ${this.version}`;
      return true;
    } catch (error) {
      this.validationMessage = errorMessage(error);
      return false;
    }
  }

  setParam(updater: (text: string) => string): void {
    this.buffer = updater(this.buffer);
  }

  async runPipeline(request: Omit<PipelineRunRequest, "config_path">): Promise<RunStatus | null> {
    if (this.runActive) {
      return null; // button is disabled while a run is active
    }
    this.runActive = true;
    try {
      const { run_id } = await this.api.runPipeline({ config_path: this.path, ...request });
      let status = await this.api.runStatus(run_id);
      while (status.state === "running") {
        await sleep(this.pollInterval);
        status = await this.api.runStatus(run_id);
      }
      this.lastRun = status;
      return status;
    } catch (error) {
      this.lastRun = { run_id: "", state: "error", error: errorMessage(error) };
      return this.lastRun;
    } finally {
      this.runActive = false;
    }
  }

  render(): string {
    if (this.state.kind === "loading") {
      return `<p class="loading">loading config…</p>`;
    }
    if (this.state.kind === "error") {
      return `<div class="error-banner">${escapeHtml(this.state.message)} <button data-action="retry">retry</button></div>`;
    }
    const runState = this.lastRun
      ? `<p class="run-status" data-state="${this.lastRun.state}">last run: ${this.lastRun.state}${
          this.lastRun.error ? ` (${escapeHtml(this.lastRun.error)})` : ""
        }</p>`
      : "";
    return `
      <div class="config-editor">
        <p class="config-path">${escapeHtml(this.path)} (version ${this.version})</p>
        <textarea data-role="config-buffer" rows="18">${escapeHtml(this.buffer)}</textarea>
        <div class="actions">
          <button data-action="validate">validate</button>
          <button data-action="save">save</button>
          <button data-action="run" ${this.runActive ? "disabled" : ""}>run pipeline</button>
        </div>
        ${this.validationMessage ? `<p class="validation">${escapeHtml(this.validationMessage)}</p>` : ""}
        ${runState}
      </div>`;
  }
}
