import { describe, expect, it } from "vitest";

import {
  buildViewModel,
  FALLBACK_COLOR,
  nodeColor,
  TYPE_COLORS,
  withServerUpdate,
} from "../src/viewmodel.js";
import type {
  GraphPayload,
  HypothesesPayload,
  InstancePayload,
  VerdictResponse,
} from "../src/types.js";

function inst(edgeId: string, uid: string, verdict: InstancePayload["verdict"]): InstancePayload {
  return {
    edge_id: edgeId,
    uid,
    type_pair: "Timestamp-App Name",
    hypothesis: "h",
    verdict,
    reviewer: "",
    note: "",
    decided_at: "",
  };
}

const GRAPH: GraphPayload = {
  nodes: [
    {
      node_id: "App Name|chrome",
      entity_type: "App Name",
      value: "Chrome",
      provenance: ["aaaa0000_t_1"],
      max_confidence: 9,
    },
    {
      node_id: "Timestamp|03 april 2021 15:24:18",
      entity_type: "Timestamp",
      value: "03 April 2021 15:24:18",
      provenance: ["aaaa0000_t_1", "aaaa0000_t_2"],
      max_confidence: 8,
    },
    {
      node_id: "Email|solo@example.com",
      entity_type: "Email",
      value: "solo@example.com",
      provenance: ["bbbb0000_t_3"],
      max_confidence: 5,
    },
  ],
  edges: [
    {
      edge_id: "e1e1e1e1e1e1e1e1",
      type_pair: "Timestamp-App Name",
      endpoints: ["Timestamp|03 april 2021 15:24:18", "App Name|chrome"],
      provenance: ["aaaa0000_t_1", "aaaa0000_t_2"],
      hypothesis: "Chrome was active at 03 April 2021 15:24:18",
    },
  ],
  isolated_groups: [
    { app_name: "Zulu", members: ["Email|solo@example.com"] },
    { app_name: "Alpha", members: [] },
  ],
};

const HYPOTHESES: HypothesesPayload = {
  run_id: "r",
  device_id: "d",
  counts: { pending: 2, valid: 0, invalid: 0, total: 2 },
  instances: [
    inst("e1e1e1e1e1e1e1e1", "aaaa0000_t_1", "pending"),
    inst("e1e1e1e1e1e1e1e1", "aaaa0000_t_2", "pending"),
  ],
};

describe("buildViewModel", () => {
  it("projects nodes with colors and degrees", () => {
    const vm = buildViewModel(GRAPH, HYPOTHESES);
    expect(vm.nodes).toHaveLength(3);
    const chrome = vm.nodes.find((n) => n.value === "Chrome")!;
    expect(chrome.color).toBe(TYPE_COLORS["App Name"]);
    expect(chrome.degree).toBe(1);
    const solo = vm.nodes.find((n) => n.value === "solo@example.com")!;
    expect(solo.degree).toBe(0);
    expect(vm.empty).toBe(false);
  });

  it("groups instances under their edge", () => {
    const vm = buildViewModel(GRAPH, HYPOTHESES);
    expect(vm.edges).toHaveLength(1);
    expect(vm.edges[0].instances).toHaveLength(2);
    expect(vm.edges[0].state).toBe("pending");
  });

  it("sorts isolated groups alphabetically", () => {
    const vm = buildViewModel(GRAPH, HYPOTHESES);
    expect(vm.isolatedGroups.map((g) => g.appName)).toEqual(["Alpha", "Zulu"]);
  });

  it("flags an empty graph", () => {
    const vm = buildViewModel(
      { nodes: [], edges: [], isolated_groups: [] },
      { run_id: "r", device_id: "d", counts: { pending: 0, valid: 0, invalid: 0, total: 0 }, instances: [] },
    );
    expect(vm.empty).toBe(true);
  });

  it("edge state follows its instances", () => {
    const mixed: HypothesesPayload = {
      ...HYPOTHESES,
      instances: [
        inst("e1e1e1e1e1e1e1e1", "aaaa0000_t_1", "valid"),
        inst("e1e1e1e1e1e1e1e1", "aaaa0000_t_2", "valid"),
      ],
    };
    expect(buildViewModel(GRAPH, mixed).edges[0].state).toBe("valid");

    const oneBad: HypothesesPayload = {
      ...HYPOTHESES,
      instances: [
        inst("e1e1e1e1e1e1e1e1", "aaaa0000_t_1", "valid"),
        inst("e1e1e1e1e1e1e1e1", "aaaa0000_t_2", "invalid"),
      ],
    };
    expect(buildViewModel(GRAPH, oneBad).edges[0].state).toBe("invalid");
  });
});

describe("withServerUpdate", () => {
  it("replaces the instance and counts without touching the input", () => {
    const vm = buildViewModel(GRAPH, HYPOTHESES);
    const resp: VerdictResponse = {
      instance: { ...inst("e1e1e1e1e1e1e1e1", "aaaa0000_t_1", "valid"), reviewer: "me" },
      changed: true,
      counts: { pending: 1, valid: 1, invalid: 0, total: 2 },
      kgca: 100.0,
    };
    const next = withServerUpdate(vm, resp);
    expect(next.counts.valid).toBe(1);
    expect(next.edges[0].instances[0].verdict).toBe("valid");
    expect(next.edges[0].instances[0].reviewer).toBe("me");
    // original untouched
    expect(vm.counts.valid).toBe(0);
    expect(vm.edges[0].instances[0].verdict).toBe("pending");
  });

  it("leaves unrelated edges alone", () => {
    const vm = buildViewModel(GRAPH, HYPOTHESES);
    const resp: VerdictResponse = {
      instance: inst("ffffffffffffffff", "cccc0000_t_9", "invalid"),
      changed: true,
      counts: vm.counts,
      kgca: "undefined",
    };
    const next = withServerUpdate(vm, resp);
    expect(next.edges[0].instances.map((i) => i.verdict)).toEqual(["pending", "pending"]);
  });
});

describe("nodeColor", () => {
  it("covers every known entity type distinctly from fallback", () => {
    for (const [name, color] of Object.entries(TYPE_COLORS)) {
      expect(nodeColor(name)).toBe(color);
      expect(color).not.toBe(FALLBACK_COLOR);
    }
    expect(nodeColor("Something Else")).toBe(FALLBACK_COLOR);
  });
});
