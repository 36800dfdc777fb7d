// Pure projection of the service payloads into what the canvas and side
// panels render. No fetching and no metric math happens here; KGCA always
// comes back from the service.

import type {
  GraphPayload,
  HypothesesPayload,
  InstancePayload,
  Verdict,
  VerdictCounts,
  VerdictResponse,
} from "./types.js";

export interface NodeVM {
  id: string;
  entityType: string;
  value: string;
  provenance: string[];
  maxConfidence: number;
  color: string;
  degree: number;
}

export interface EdgeVM {
  id: string;
  typePair: string;
  source: string;
  target: string;
  hypothesis: string;
  instances: InstancePayload[];
  // Summary of the instance verdicts: all valid, any invalid, else pending.
  state: Verdict;
}

export interface IsolatedGroupVM {
  appName: string;
  members: string[];
}

export interface GraphViewModel {
  nodes: NodeVM[];
  edges: EdgeVM[];
  isolatedGroups: IsolatedGroupVM[];
  counts: VerdictCounts;
  empty: boolean;
}

// One stable color per entity type; anything unexpected falls back to grey.
export const TYPE_COLORS: Record<string, string> = {
  "App Name": "#b07aa1",
  "Username": "#ff9da7",
  "Human Name": "#e15759",
  "Phone Number": "#59a14f",
  "Email": "#4e79a7",
  "Search keyword": "#76b7b2",
  "Message": "#9c755f",
  "MAC Address": "#edc948",
  "Longitude": "#86bcb6",
  "Latitude": "#86bcb6",
  "Address": "#bab0ac",
  "Timestamp": "#f28e2b",
};

export const FALLBACK_COLOR = "#8a8a8a";

export function nodeColor(entityType: string): string {
  return TYPE_COLORS[entityType] ?? FALLBACK_COLOR;
}

function edgeState(instances: InstancePayload[]): Verdict {
  if (instances.length === 0) {
    return "pending";
  }
  if (instances.some((i) => i.verdict === "invalid")) {
    return "invalid";
  }
  if (instances.every((i) => i.verdict === "valid")) {
    return "valid";
  }
  return "pending";
}

export function buildViewModel(graph: GraphPayload, hypotheses: HypothesesPayload): GraphViewModel {
  const degree = new Map<string, number>();
  for (const edge of graph.edges) {
    for (const end of edge.endpoints) {
      degree.set(end, (degree.get(end) ?? 0) + 1);
    }
  }

  const byEdge = new Map<string, InstancePayload[]>();
  for (const inst of hypotheses.instances) {
    const bucket = byEdge.get(inst.edge_id);
    if (bucket) {
      bucket.push(inst);
    } else {
      byEdge.set(inst.edge_id, [inst]);
    }
  }

  const nodes: NodeVM[] = graph.nodes.map((n) => ({
    id: n.node_id,
    entityType: n.entity_type,
    value: n.value,
    provenance: n.provenance,
    maxConfidence: n.max_confidence,
    color: nodeColor(n.entity_type),
    degree: degree.get(n.node_id) ?? 0,
  }));

  const edges: EdgeVM[] = graph.edges.map((e) => {
    const instances = byEdge.get(e.edge_id) ?? [];
    return {
      id: e.edge_id,
      typePair: e.type_pair,
      source: e.endpoints[0],
      target: e.endpoints[1],
      hypothesis: e.hypothesis,
      instances,
      state: edgeState(instances),
    };
  });

  const isolatedGroups: IsolatedGroupVM[] = graph.isolated_groups
    .map((g) => ({ appName: g.app_name, members: [...g.members] }))
    .sort((a, b) => a.appName.localeCompare(b.appName));

  return {
    nodes,
    edges,
    isolatedGroups,
    counts: hypotheses.counts,
    empty: nodes.length === 0,
  };
}

// Fold a verdict response back into the view model without refetching the
// whole graph. Returns a new object; the input is untouched.
export function withServerUpdate(vm: GraphViewModel, resp: VerdictResponse): GraphViewModel {
  const inst = resp.instance;
  const edges = vm.edges.map((edge) => {
    if (edge.id !== inst.edge_id) {
      return edge;
    }
    let found = false;
    const instances = edge.instances.map((i) => {
      if (i.uid === inst.uid) {
        found = true;
        return inst;
      }
      return i;
    });
    if (!found) {
      instances.push(inst);
    }
    return { ...edge, instances, state: edgeState(instances) };
  });
  return { ...vm, edges, counts: resp.counts };
}

export function findEdge(vm: GraphViewModel, edgeId: string): EdgeVM | undefined {
  return vm.edges.find((e) => e.id === edgeId);
}

export function findNode(vm: GraphViewModel, nodeId: string): NodeVM | undefined {
  return vm.nodes.find((n) => n.id === nodeId);
}
