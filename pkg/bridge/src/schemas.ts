import { z } from 'zod';

/** Input: one text per line. */
export const TextRecord = z.object({
  id: z.string(),
  text: z.string(),
});
export type TextRecord = z.infer<typeof TextRecord>;

/** Score-file contract consumed by the evaluator (natural-log values <= 0). */
export const ScoreRecord = z
  .object({
    id: z.string(),
    tokens: z.array(z.string()),
    logprobs: z.array(z.number().max(0)),
  })
  .refine((r) => r.tokens.length === r.logprobs.length, {
    message: 'tokens and logprobs must have equal length',
  });
export type ScoreRecord = z.infer<typeof ScoreRecord>;

/** Embedding-file contract: one vector per token. */
export const EmbeddingRecord = z.object({
  token: z.string(),
  vec: z.array(z.number()).min(1),
});
export type EmbeddingRecord = z.infer<typeof EmbeddingRecord>;

/** Sentiment-file contract: id-keyed scores in [0,1]. */
export const SentimentRecord = z.object({
  id: z.string(),
  score: z.number().min(0).max(1),
});
export type SentimentRecord = z.infer<typeof SentimentRecord>;

export const MODES = ['logprobs', 'embeddings', 'sentiment'] as const;
export type Mode = (typeof MODES)[number];
