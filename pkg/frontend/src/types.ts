// Payload shapes as served under /api/v1. Field names mirror the JSON
// exactly; the view model layer owns any reshaping.

export type Verdict = "pending" | "valid" | "invalid";

export interface RunSummary {
  run_id: string;
  device_id: string;
  created_at: string;
  engine: string;
  sample_interval: number;
  min_confidence: number;
  stages: Record<string, boolean>;
  counts: Record<string, number>;
}

export interface RunListPayload {
  runs: RunSummary[];
}

export interface GraphNodePayload {
  node_id: string;
  entity_type: string;
  value: string;
  provenance: string[];
  max_confidence: number;
}

export interface GraphEdgePayload {
  edge_id: string;
  type_pair: string;
  endpoints: [string, string];
  provenance: string[];
  hypothesis: string;
}

export interface IsolatedGroupPayload {
  app_name: string;
  members: string[];
}

export interface GraphPayload {
  nodes: GraphNodePayload[];
  edges: GraphEdgePayload[];
  isolated_groups: IsolatedGroupPayload[];
}

export interface InstancePayload {
  edge_id: string;
  uid: string;
  type_pair: string;
  hypothesis: string;
  verdict: Verdict;
  reviewer: string;
  note: string;
  decided_at: string;
}

export interface VerdictCounts {
  pending: number;
  valid: number;
  invalid: number;
  total: number;
}

export interface HypothesesPayload {
  run_id: string;
  device_id: string;
  counts: VerdictCounts;
  instances: InstancePayload[];
}

export interface MetricsPayload {
  run_id: string;
  engine: string;
  min_confidence: number;
  timestamp: string;
  metrics: Record<string, number | "undefined">;
  tally: Record<string, number>;
  verdicts: VerdictCounts;
}

export interface ProvenancePayload {
  uid: string;
  run_id: string;
  device_id: string;
  record: {
    database: string;
    table: string;
    path: string;
    lid: number;
    pairs: Record<string, string>;
  };
  table_csv: string;
  database: Record<string, unknown> | null;
}

export interface VerdictRequest {
  edge_id: string;
  uid: string;
  verdict: "valid" | "invalid";
  reviewer?: string;
  note?: string;
}

export interface VerdictResponse {
  instance: InstancePayload;
  changed: boolean;
  counts: VerdictCounts;
  kgca: number | "undefined";
}
