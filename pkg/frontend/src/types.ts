/**
 * API payload schemas and the client-side transcript types.
 *
 * The zod schemas mirror the service's published response models; parsing
 * at the boundary means the rest of the UI never sees malformed data.
 */

import { z } from "zod";

export const retrievedEntrySchema = z.object({
  chunk_id: z.string(),
  score: z.number(),
  rank: z.number().int(),
  heading_path: z.array(z.string()),
});

export const answerSchema = z.object({
  text: z.string(),
  model_id: z.string(),
  used_chunk_ids: z.array(z.string()),
  is_null_response: z.boolean(),
  latency_ms: z.number(),
  token_usage: z.object({ input: z.number(), output: z.number() }),
});

export const costEstimateSchema = z.object({
  n_context_chunks: z.number().int(),
  components: z.array(
    z.object({
      name: z.string(),
      tokens: z.number(),
      price_per_million: z.number(),
      cost: z.number(),
    }),
  ),
  total_tokens: z.number(),
  total_cost: z.number(),
});

export const askResponseSchema = z.object({
  answer: answerSchema,
  retrieved: z.array(retrievedEntrySchema),
  retrieval_warning: z.string().nullable().optional(),
  timings_ms: z.record(z.string(), z.number()),
  cost_estimate: costEstimateSchema,
});

export const chunkSchema = z.object({
  chunk_id: z.string(),
  doc_id: z.string(),
  heading_path: z.array(z.string()),
  text: z.string(),
  token_count: z.number().int(),
  indivisible: z.boolean(),
});

export const healthSchema = z.object({
  status: z.string(),
  corpus_docs: z.number().int(),
  chunk_count: z.number().int(),
  index_versions: z.record(z.string(), z.string()),
});

export const errorEnvelopeSchema = z.object({
  error: z.object({
    stage: z.string(),
    code: z.string(),
    message: z.string(),
  }),
});

export type AskResponse = z.infer<typeof askResponseSchema>;
export type ChunkResponse = z.infer<typeof chunkSchema>;
export type HealthResponse = z.infer<typeof healthSchema>;

/** One retrieved chunk as shown in the evidence panel. */
export interface Citation {
  chunkId: string;
  docId: string;
  headingPath: string[];
  score: number;
  rank: number;
}

/** A completed question/answer exchange. */
export interface ChatTurn {
  query: string;
  answerMarkdown: string;
  citations: Citation[];
  timingsMs: Record<string, number>;
  isNullResponse: boolean;
}

/** Chunk ids are "<doc_id>#<ordinal>"; the doc id is everything before the #. */
export function docIdOf(chunkId: string): string {
  const hash = chunkId.indexOf("#");
  return hash === -1 ? chunkId : chunkId.slice(0, hash);
}

export function toChatTurn(query: string, response: AskResponse): ChatTurn {
  return {
    query,
    answerMarkdown: response.answer.text,
    citations: response.retrieved.map((entry) => ({
      chunkId: entry.chunk_id,
      docId: docIdOf(entry.chunk_id),
      headingPath: entry.heading_path,
      score: entry.score,
      rank: entry.rank,
    })),
    timingsMs: response.timings_ms,
    isNullResponse: response.answer.is_null_response,
  };
}
