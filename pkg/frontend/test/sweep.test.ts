import { describe, expect, it } from "vitest";

import { SweepPanel, applyParamToConfig, parseValueGrid, sweepPoints } from "../src/panels/sweep.js";
import { MockApi, sweepFixture } from "./mock.js";

describe("sweepPoints", () => {
  it("pairs grid values with ratios verbatim", () => {
    expect(sweepPoints(sweepFixture)).toEqual([
      { value: 1, ratio: 0.8 },
      { value: 2, ratio: 0.45 },
      { value: 3, ratio: 0.2 },
      { value: 4, ratio: 0.05 },
    ]);
  });
});

describe("applyParamToConfig", () => {
  const buffer = "seed: 1\nstages:\n  - operator: filter_by_perplexity\n    params: {model_path: m.bin, fil_ppl: 1}\n";

  it("writes the chosen value into the buffer", () => {
    const updated = applyParamToConfig(buffer, "filter_by_perplexity", "fil_ppl", 3);
    expect(updated).toContain("fil_ppl: 3");
    expect(updated).not.toContain("fil_ppl: 1");
  });

  it("touches only the targeted parameter", () => {
    const updated = applyParamToConfig(buffer, "filter_by_perplexity", "fil_ppl", 3);
    expect(updated).toContain("model_path: m.bin");
    expect(updated).toContain("seed: 1");
    expect(updated.replace("fil_ppl: 3", "fil_ppl: 1")).toBe(buffer);
  });

  it("appends a stage snippet when the parameter is absent", () => {
    const updated = applyParamToConfig("stages: []\n", "filter_by_length", "min_chars", 50);
    expect(updated).toContain("operator: filter_by_length");
    expect(updated).toContain("min_chars: 50");
  });
});

describe("parseValueGrid", () => {
  it("parses comma-separated numbers", () => {
    expect(parseValueGrid("1, 2,3.5 ,4")).toEqual([1, 2, 3.5, 4]);
  });

  it("drops blanks and junk", () => {
    expect(parseValueGrid("1,,x,2")).toEqual([1, 2]);
  });
});

describe("SweepPanel", () => {
  it("plots exactly the fixture ratios", async () => {
    const panel = new SweepPanel(new MockApi());
    await panel.runSweep({ filter: "filter_by_perplexity", param: "fil_ppl", values: [1, 2, 3, 4] });
    const html = panel.render();
    for (const ratio of [0.8, 0.45, 0.2, 0.05]) {
      expect(html).toContain(`data-ratio="${ratio}"`);
      expect(html).toContain(`>${ratio}</td>`); // displayed number is verbatim
    }
  });

  it("monotone fixture stays monotone in the view model (data-level, not pixels)", async () => {
    const panel = new SweepPanel(new MockApi());
    await panel.runSweep({ filter: "filter_by_perplexity", param: "fil_ppl", values: [1, 2, 3, 4] });
    const ratios = sweepPoints(panel.result!).map((p) => p.ratio);
    const sorted = [...ratios].sort((a, b) => b - a);
    expect(ratios).toEqual(sorted);
  });

  it("apply hands the chosen value to the config buffer hook", async () => {
    const panel = new SweepPanel(new MockApi());
    await panel.runSweep({ filter: "filter_by_perplexity", param: "fil_ppl", values: [1, 2, 3, 4] });
    let buffer = "params: {fil_ppl: 1}";
    panel.onApply = (filterName, param, value) => {
      buffer = applyParamToConfig(buffer, filterName, param, value);
    };
    panel.apply(3);
    expect(buffer).toContain("fil_ppl: 3");
  });

  it("drops stale responses (latest wins)", async () => {
    const api = new MockApi();
    api.deferSweeps = true;
    const panel = new SweepPanel(api);
    const first = panel.runSweep({ filter: "f", param: "p", values: [1] });
    const second = panel.runSweep({ filter: "f", param: "p", values: [2] });
    // resolve in reverse order: the second request answers first
    api.pendingSweeps[1]!({ ...sweepFixture, values: [2], filter_ratios: [0.5] });
    await second;
    api.pendingSweeps[0]!({ ...sweepFixture, values: [1], filter_ratios: [0.9] });
    await first;
    expect(panel.result?.values).toEqual([2]);
    expect(panel.result?.filter_ratios).toEqual([0.5]);
  });

  it("loads filter operators for the picker", async () => {
    const panel = new SweepPanel(new MockApi());
    await panel.loadOperators();
    expect(panel.operators.map((o) => o.name)).toEqual([
      "filter_by_length",
      "filter_by_perplexity",
    ]);
    expect(panel.render()).toContain('<option value="filter_by_length">');
  });

  it("shows API validation errors inline", async () => {
    const api = new MockApi();
    api.sweep = async () => {
      const { ApiError } = await import("../src/api.js");
      throw new ApiError(400, "config_invalid", "filter 'nope' has no parameter 'x'");
    };
    const panel = new SweepPanel(api);
    await panel.runSweep({ filter: "nope", param: "x", values: [1] });
    expect(panel.state.kind).toBe("error");
    expect(panel.render()).toContain("config_invalid");
  });
});
