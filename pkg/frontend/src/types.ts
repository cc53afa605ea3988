/**
 * API payload schemas.  Every payload the UI renders is validated against
 * these before it touches state, so a drifting server contract surfaces as
 * an error banner instead of silently wrong pixels.
 */

import { z } from "zod";

export const LABELS = ["hate", "abusive", "neither"] as const;
export type Label = (typeof LABELS)[number];

export const LANGUAGES = ["en", "hi", "hi_codemix"] as const;
export type Language = (typeof LANGUAGES)[number];

export const ScoreResultSchema = z.object({
  label: z.enum(LABELS),
  probabilities: z.array(z.number()).length(3),
  language: z.enum(LANGUAGES),
  model_version: z.number().int(),
  feedback_id: z.string().nullable(),
  latency_ms: z.number(),
});
export type ScoreResult = z.infer<typeof ScoreResultSchema>;

export const PageScoreSchema = z.object({
  total: z.number().int().nonnegative(),
  percentages: z.object({
    hate: z.number(),
    abusive: z.number(),
    neither: z.number(),
  }),
  results: z.array(ScoreResultSchema),
});
export type PageScore = z.infer<typeof PageScoreSchema>;

export const CheckResultSchema = z.object({
  allow: z.boolean(),
  label: z.enum(LABELS),
  probabilities: z.array(z.number()).length(3),
  language: z.enum(LANGUAGES),
  model_version: z.number().int(),
});
export type CheckResult = z.infer<typeof CheckResultSchema>;

export const ReviewItemSchema = z.object({
  id: z.string(),
  text: z.string(),
  language: z.enum(LANGUAGES),
  predicted: z.enum(LABELS),
  probabilities: z.array(z.number()).length(3),
  confidence: z.number(),
  queued: z.boolean(),
  timestamp: z.string(),
  verdict: z.string(),
  label: z.enum(LABELS).nullable(),
});
export type ReviewItem = z.infer<typeof ReviewItemSchema>;

export const ReviewListSchema = z.object({
  items: z.array(ReviewItemSchema),
});

export const RetrainResultSchema = z.object({
  language: z.enum(LANGUAGES),
  version: z.number().int(),
});
export type RetrainResult = z.infer<typeof RetrainResultSchema>;

export const ModelInfoSchema = z.object({
  version: z.number().int(),
  path: z.string(),
  updated: z.string(),
});
export type ModelInfo = z.infer<typeof ModelInfoSchema>;

export const ModelsSchema = z.object({
  models: z.record(z.string(), ModelInfoSchema),
});

export const ErrorEnvelopeSchema = z.object({
  error: z.object({
    code: z.string(),
    message: z.string(),
  }),
});

/** A comment the chat demo has posted, with the verdict that let it through. */
export interface PostedComment {
  text: string;
  result: ScoreResult;
}
