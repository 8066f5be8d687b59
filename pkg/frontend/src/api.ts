/**
 * Thin fetch client for the guideline answering service.
 *
 * Every response is schema-validated; service errors keep their stage and
 * code so the UI can say what actually failed.
 */

import {
  askResponseSchema,
  chunkSchema,
  errorEnvelopeSchema,
  healthSchema,
  type AskResponse,
  type ChunkResponse,
  type HealthResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly stage: string,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  async ask(query: string, contextSize?: number): Promise<AskResponse> {
    const body: Record<string, unknown> = { query };
    if (contextSize !== undefined) body.context_size = contextSize;
    const data = await this.request("/api/ask", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return askResponseSchema.parse(data);
  }

  async getChunk(chunkId: string): Promise<ChunkResponse> {
    // chunk ids contain "#", which would otherwise become a fragment
    const data = await this.request(`/api/chunks/${encodeURIComponent(chunkId)}`);
    return chunkSchema.parse(data);
  }

  async health(): Promise<HealthResponse> {
    return healthSchema.parse(await this.request("/api/health"));
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const data: unknown = await response.json();
    if (!response.ok) {
      const parsed = errorEnvelopeSchema.safeParse(data);
      if (parsed.success) {
        const { stage, code, message } = parsed.data.error;
        throw new ApiError(response.status, stage, code, message);
      }
      throw new ApiError(response.status, "unknown", "UnknownError", `HTTP ${response.status}`);
    }
    return data;
  }
}
