// Small display helpers kept pure so they can be unit tested.

import type { ApiError } from "./api.js";
import type { Verdict } from "./types.js";

export function formatKgcaBanner(kgca: number | "undefined" | null | undefined): string {
  if (kgca === null || kgca === undefined || kgca === "undefined") {
    return "KGCA n/a";
  }
  return `KGCA ${kgca.toFixed(2)}%`;
}

export function formatMetricValue(value: number | "undefined"): string {
  return value === "undefined" ? "n/a" : value.toFixed(2);
}

export function verdictBadgeClass(verdict: Verdict): string {
  switch (verdict) {
    case "valid":
      return "badge badge-valid";
    case "invalid":
      return "badge badge-invalid";
    default:
      return "badge badge-pending";
  }
}

export function formatApiError(err: ApiError): string {
  return `${err.errorType} (${err.status}): ${err.detail}`;
}

// The service rejects corrections without a note; gate client-side so the
// reviewer gets told before the round trip.
export function noteRequired(current: Verdict, target: Verdict): boolean {
  return current !== "pending" && current !== target;
}

export function formatCount(counts: { pending: number; valid: number; invalid: number; total: number }): string {
  return `${counts.valid} valid / ${counts.invalid} invalid / ${counts.pending} pending of ${counts.total}`;
}
