/**
 * Test doubles: canned API payloads and a routing fetch mock that records
 * every call it serves.
 */

import type { FetchLike } from "../src/api.js";
import type {
  CheckResult,
  ModelInfo,
  PageScore,
  ReviewItem,
  ScoreResult,
} from "../src/types.js";

export interface RecordedCall {
  method: string;
  /** Path as requested, including any query string. */
  path: string;
  /** Parsed JSON request body, or null for body-less requests. */
  body: unknown;
}

export type RouteResult =
  | { status: number; json: unknown }
  | { status: number; raw: string };

export type Route = RouteResult | ((call: RecordedCall) => RouteResult);

/**
 * Build a FetchLike that routes "METHOD /path" (query string stripped for
 * the lookup) to canned responses.  Unrouted requests throw, so a test that
 * hits an endpoint it did not declare fails loudly.
 */
export function mockApi(routes: Record<string, Route>): {
  fetchImpl: FetchLike;
  calls: RecordedCall[];
} {
  const calls: RecordedCall[] = [];
  const fetchImpl: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? JSON.parse(init.body) : null;
    const call: RecordedCall = { method, path: input, body };
    calls.push(call);
    const key = `${method} ${input.split("?")[0]}`;
    const route = routes[key];
    if (!route) {
      throw new Error(`no route for ${key}`);
    }
    const result = typeof route === "function" ? route(call) : route;
    const payload = "raw" in result ? result.raw : JSON.stringify(result.json);
    return new Response(payload, {
      status: result.status,
      headers: { "content-type": "application/json" },
    });
  };
  return { fetchImpl, calls };
}

/** A fetch whose network layer always fails. */
export function rejectingFetch(): FetchLike {
  return () => Promise.reject(new TypeError("fetch failed"));
}

export function scoreResult(overrides: Partial<ScoreResult> = {}): ScoreResult {
  return {
    label: "neither",
    probabilities: [0.05, 0.1, 0.85],
    language: "en",
    model_version: 1,
    feedback_id: null,
    latency_ms: 2.4,
    ...overrides,
  };
}

export function checkResult(overrides: Partial<CheckResult> = {}): CheckResult {
  return {
    allow: true,
    label: "neither",
    probabilities: [0.05, 0.1, 0.85],
    language: "en",
    model_version: 1,
    ...overrides,
  };
}

export function pageScore(overrides: Partial<PageScore> = {}): PageScore {
  return {
    total: 10,
    percentages: { hate: 20.0, abusive: 10.0, neither: 70.0 },
    results: [],
    ...overrides,
  };
}

export function reviewItem(overrides: Partial<ReviewItem> = {}): ReviewItem {
  return {
    id: "fb-1",
    text: "borderline comment",
    language: "en",
    predicted: "abusive",
    probabilities: [0.2, 0.45, 0.35],
    confidence: 0.45,
    queued: true,
    timestamp: "2026-08-14T10:00:00+00:00",
    verdict: "pending",
    label: null,
    ...overrides,
  };
}

export function modelInfo(overrides: Partial<ModelInfo> = {}): ModelInfo {
  return {
    version: 1,
    path: "hub/en/v1",
    updated: "2026-08-14T09:00:00+00:00",
    ...overrides,
  };
}
