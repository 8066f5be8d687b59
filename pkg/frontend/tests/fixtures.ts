/** Canned service payloads shared across the test files. */

import type { AskResponse, ChunkResponse } from "../src/types";

export function makeRetrieved(chunkId: string, rank: number, score: number, headings: string[]) {
  return { chunk_id: chunkId, rank, score, heading_path: headings };
}

export function makeAskResponse(overrides: Partial<AskResponse> = {}): AskResponse {
  const retrieved = [
    makeRetrieved("NG0001#0004", 1, 0.91, ["Hypertension", "Step 1 treatment"]),
    makeRetrieved("NG0007#0000", 2, 0.62, ["Lipids"]),
    makeRetrieved("NG0003#0012", 3, 0.41, ["Diabetes", "Monitoring", "HbA1c"]),
  ];
  return {
    answer: {
      text: "Offer atorvastatin 20 mg [NG0001#0004].",
      model_id: "stub-chat",
      used_chunk_ids: ["NG0001#0004"],
      is_null_response: false,
      latency_ms: 12.5,
      token_usage: { input: 900, output: 40 },
      ...overrides.answer,
    },
    retrieved,
    retrieval_warning: null,
    timings_ms: { retrieval: 3.1, rerank: 1.2, generation: 8.2 },
    cost_estimate: {
      n_context_chunks: 3,
      components: [
        { name: "embedding", tokens: 10, price_per_million: 0.18, cost: 0.0000018 },
        { name: "llm_input", tokens: 900, price_per_million: 1.1, cost: 0.00099 },
        { name: "llm_output", tokens: 40, price_per_million: 4.4, cost: 0.000176 },
      ],
      total_tokens: 950,
      total_cost: 0.0011678,
    },
    ...overrides,
  };
}

export function makeChunk(overrides: Partial<ChunkResponse> = {}): ChunkResponse {
  return {
    chunk_id: "NG0001#0004",
    doc_id: "NG0001",
    heading_path: ["Hypertension", "Step 1 treatment"],
    text: "Offer an ACE inhibitor or an ARB to adults under 55.",
    token_count: 12,
    indivisible: false,
    ...overrides,
  };
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
