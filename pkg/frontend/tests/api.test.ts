import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, toApiError } from "../src/api.js";

function fakeFetch(routes: Record<string, { status: number; body: unknown }>) {
  const seen: Array<{ url: string; init?: RequestInit }> = [];
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    seen.push({ url, init });
    const route = routes[url];
    if (!route) {
      return new Response(JSON.stringify({ error: "RunNotFound", detail: url }), { status: 404 });
    }
    return new Response(JSON.stringify(route.body), { status: route.status });
  };
  return { impl, seen };
}

describe("ApiClient", () => {
  it("prefixes every request with /api/v1", async () => {
    const { impl, seen } = fakeFetch({
      "/api/v1/health": { status: 200, body: { status: "ok" } },
    });
    const client = new ApiClient(impl);
    const health = await client.health();
    expect(health.status).toBe("ok");
    expect(seen[0].url).toBe("/api/v1/health");
  });

  it("unwraps the runs list", async () => {
    const run = {
      run_id: "abc",
      device_id: "DEV",
      created_at: "2021-01-01T00:00:00+00:00",
      engine: "mock",
      sample_interval: 1,
      min_confidence: 5,
      stages: {},
      counts: {},
    };
    const { impl } = fakeFetch({ "/api/v1/runs": { status: 200, body: { runs: [run] } } });
    const runs = await new ApiClient(impl).listRuns();
    expect(runs).toHaveLength(1);
    expect(runs[0].run_id).toBe("abc");
  });

  it("posts verdicts as JSON", async () => {
    const { impl, seen } = fakeFetch({
      "/api/v1/runs/abc/verdicts": {
        status: 200,
        body: { instance: {}, changed: true, counts: {}, kgca: 94.44 },
      },
    });
    const resp = await new ApiClient(impl).postVerdict("abc", {
      edge_id: "e",
      uid: "u",
      verdict: "valid",
    });
    expect(resp.kgca).toBe(94.44);
    expect(seen[0].init?.method).toBe("POST");
    const body = JSON.parse(String(seen[0].init?.body));
    expect(body.verdict).toBe("valid");
  });

  it("maps service errors to ApiError with type and detail", async () => {
    const { impl } = fakeFetch({
      "/api/v1/provenance/zz": {
        status: 409,
        body: { error: "CustodyBreach", detail: "uid mismatch" },
      },
    });
    const client = new ApiClient(impl);
    const err = await client.getProvenance("zz").catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.errorType).toBe("CustodyBreach");
    expect(err.detail).toBe("uid mismatch");
  });

  it("honors a base prefix", async () => {
    const { impl, seen } = fakeFetch({
      "http://x:1/api/v1/health": { status: 200, body: { status: "ok" } },
    });
    await new ApiClient(impl, "http://x:1").health();
    expect(seen[0].url).toBe("http://x:1/api/v1/health");
  });
});

describe("toApiError", () => {
  it("reads the standard error envelope", () => {
    const err = toApiError(404, JSON.stringify({ error: "UnknownUid", detail: "nope" }));
    expect(err.errorType).toBe("UnknownUid");
    expect(err.detail).toBe("nope");
  });

  it("flattens framework validation bodies", () => {
    const err = toApiError(422, JSON.stringify({ detail: [{ loc: ["body", "verdict"] }] }));
    expect(err.errorType).toBe("ValidationError");
    expect(err.detail).toContain("verdict");
  });

  it("falls back on non-JSON bodies", () => {
    const err = toApiError(502, "Bad Gateway");
    expect(err.errorType).toBe("HttpError");
    expect(err.detail).toBe("Bad Gateway");
  });
});
