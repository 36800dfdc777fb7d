// Thin client for the review service. Every method returns the parsed
// payload or throws ApiError carrying the service's own error type and
// detail text, so callers can show it verbatim.

import type {
  GraphPayload,
  HypothesesPayload,
  MetricsPayload,
  ProvenancePayload,
  RunListPayload,
  RunSummary,
  VerdictRequest,
  VerdictResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  status: number;
  errorType: string;
  detail: string;

  constructor(status: number, errorType: string, detail: string) {
    super(`${errorType}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.errorType = errorType;
    this.detail = detail;
  }
}

const PREFIX = "/api/v1";

export class ApiClient {
  private fetchImpl: FetchLike;
  private base: string;

  constructor(fetchImpl?: FetchLike, base = "") {
    // Default binds to the page's own origin so the bundle works wherever
    // the service mounts it.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    this.base = base;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.base + PREFIX + path, init);
    const text = await resp.text();
    if (!resp.ok) {
      throw toApiError(resp.status, text);
    }
    return JSON.parse(text) as T;
  }

  async health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  async listRuns(): Promise<RunSummary[]> {
    const payload = await this.request<RunListPayload>("/runs");
    return payload.runs;
  }

  async getRun(runId: string): Promise<Record<string, unknown>> {
    return this.request(`/runs/${runId}`);
  }

  async getGraph(runId: string): Promise<GraphPayload> {
    return this.request(`/runs/${runId}/graph`);
  }

  async getHypotheses(runId: string): Promise<HypothesesPayload> {
    return this.request(`/runs/${runId}/hypotheses`);
  }

  async getMetrics(runId: string): Promise<MetricsPayload> {
    return this.request(`/runs/${runId}/metrics`);
  }

  async getProvenance(uid: string): Promise<ProvenancePayload> {
    return this.request(`/provenance/${uid}`);
  }

  async postVerdict(runId: string, body: VerdictRequest): Promise<VerdictResponse> {
    return this.request(`/runs/${runId}/verdicts`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}

export function toApiError(status: number, text: string): ApiError {
  try {
    const body = JSON.parse(text);
    if (body && typeof body.error === "string") {
      return new ApiError(status, body.error, String(body.detail ?? ""));
    }
    // Validation failures come back as {"detail": [...]} from the framework.
    if (body && body.detail !== undefined) {
      return new ApiError(status, "ValidationError", JSON.stringify(body.detail));
    }
  } catch {
    // fall through to the generic error
  }
  return new ApiError(status, "HttpError", text || `status ${status}`);
}
