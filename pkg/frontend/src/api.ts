/**
 * Thin typed client over the /api/v1 endpoints.  All classification comes
 * from the server; this file only transports and validates it.
 */

import { z } from "zod";
import {
  CheckResultSchema,
  ErrorEnvelopeSchema,
  Label,
  Language,
  ModelInfo,
  ModelsSchema,
  PageScore,
  PageScoreSchema,
  RetrainResultSchema,
  ReviewItem,
  ReviewItemSchema,
  ReviewListSchema,
  ScoreResult,
  ScoreResultSchema,
  CheckResult,
  RetrainResult,
} from "./types.js";

/** Server-reported failure: the envelope's code/message, verbatim. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The network itself failed; the service may be down. */
export class ApiUnreachableError extends Error {
  constructor(cause: unknown) {
    super("moderation service unreachable");
    this.name = "ApiUnreachableError";
    this.cause = cause;
  }
}

/** The server answered 2xx but the payload does not match the contract. */
export class SchemaError extends Error {
  constructor(detail: string) {
    super(`unexpected API payload: ${detail}`);
    this.name = "SchemaError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (cause) {
      throw new ApiUnreachableError(cause);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const envelope = ErrorEnvelopeSchema.safeParse(body);
      if (envelope.success) {
        throw new ApiError(
          response.status,
          envelope.data.error.code,
          envelope.data.error.message,
        );
      }
      throw new ApiError(response.status, "http_error", `HTTP ${response.status}`);
    }
    return body;
  }

  private async post(path: string, payload: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  private parse<T>(schema: z.ZodType<T>, payload: unknown): T {
    const result = schema.safeParse(payload);
    if (!result.success) {
      throw new SchemaError(result.error.message);
    }
    return result.data;
  }

  /** Score one comment; feedback capture stays on unless record=false. */
  async score(
    text: string,
    options: { record?: boolean; language?: Language } = {},
  ): Promise<ScoreResult> {
    const query = options.record === false ? "?record=false" : "";
    const payload: Record<string, unknown> = { text };
    if (options.language) payload.language = options.language;
    return this.parse(ScoreResultSchema, await this.post(`/api/v1/score${query}`, payload));
  }

  /** Score a whole page; never records feedback (polling is repeatable). */
  async pageScore(comments: string[]): Promise<PageScore> {
    return this.parse(
      PageScoreSchema,
      await this.post("/api/v1/page/score", { comments }),
    );
  }

  /** Pre-post gate: allow=true only for a "neither" verdict; never records. */
  async check(text: string): Promise<CheckResult> {
    return this.parse(CheckResultSchema, await this.post("/api/v1/check", { text }));
  }

  async review(language?: Language): Promise<ReviewItem[]> {
    const query = language ? `?language=${language}` : "";
    const payload = this.parse(
      ReviewListSchema,
      await this.request(`/api/v1/review${query}`),
    );
    return payload.items;
  }

  async resolve(
    id: string,
    verdict: "confirmed" | "relabeled",
    label?: Label,
  ): Promise<ReviewItem> {
    const payload: Record<string, unknown> = { verdict };
    if (label) payload.label = label;
    return this.parse(
      ReviewItemSchema,
      await this.post(`/api/v1/feedback/${id}/resolve`, payload),
    );
  }

  async retrain(language: Language): Promise<RetrainResult> {
    return this.parse(
      RetrainResultSchema,
      await this.post("/api/v1/retrain", { language }),
    );
  }

  async models(): Promise<Record<string, ModelInfo>> {
    const payload = this.parse(ModelsSchema, await this.request("/api/v1/models"));
    return payload.models;
  }
}
