/**
 * Client-side session state: the transcript, the single in-flight request
 * gate, and the evidence inspector.
 *
 * The store is framework-free; React binds to it with useSyncExternalStore.
 * The transcript lives only in the browser, matching the service's
 * single-turn contract.
 */

import { ApiError } from "./api";
import { toChatTurn, type AskResponse, type ChatTurn, type ChunkResponse } from "./types";

export interface AskApi {
  ask(query: string): Promise<AskResponse>;
  getChunk(chunkId: string): Promise<ChunkResponse>;
}

export type TurnState =
  | { kind: "pending"; query: string }
  | { kind: "error"; query: string; message: string }
  | { kind: "answered"; query: string; turn: ChatTurn };

export interface InspectorState {
  turnIndex: number | null;
  selectedChunkId: string | null;
  chunk: ChunkResponse | null;
  loading: boolean;
  notice: string | null;
}

export interface AppState {
  turns: TurnState[];
  pending: boolean;
  inspector: InspectorState;
}

const emptyInspector: InspectorState = {
  turnIndex: null,
  selectedChunkId: null,
  chunk: null,
  loading: false,
  notice: null,
};

export class ChatStore {
  private state: AppState = { turns: [], pending: false, inspector: emptyInspector };
  private listeners = new Set<() => void>();

  constructor(private readonly api: AskApi) {}

  getState = (): AppState => this.state;

  subscribe = (listener: () => void): (() => void) => {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  };

  /** Starts an ask; refuses while another is in flight or the query is blank. */
  async submit(query: string): Promise<boolean> {
    const trimmed = query.trim();
    if (!trimmed || this.state.pending) return false;
    const index = this.state.turns.length;
    this.update({
      turns: [...this.state.turns, { kind: "pending", query: trimmed }],
      pending: true,
    });
    await this.runAsk(index, trimmed);
    return true;
  }

  /** Re-submits a failed turn in place. */
  async retry(index: number): Promise<boolean> {
    const turn = this.state.turns[index];
    if (!turn || turn.kind !== "error" || this.state.pending) return false;
    this.update({
      turns: replaceAt(this.state.turns, index, { kind: "pending", query: turn.query }),
      pending: true,
    });
    await this.runAsk(index, turn.query);
    return true;
  }

  /** Points the inspector at an answered turn's evidence. */
  selectTurn(index: number): void {
    const turn = this.state.turns[index];
    if (!turn || turn.kind !== "answered") return;
    this.update({ inspector: { ...emptyInspector, turnIndex: index } });
  }

  /** Fetches a cited chunk's full text for the inspector. */
  async selectCitation(chunkId: string): Promise<void> {
    this.update({
      inspector: {
        ...this.state.inspector,
        selectedChunkId: chunkId,
        chunk: null,
        loading: true,
        notice: null,
      },
    });
    try {
      const chunk = await this.api.getChunk(chunkId);
      this.update({ inspector: { ...this.state.inspector, chunk, loading: false } });
    } catch (err) {
      const notice =
        err instanceof ApiError && err.status === 404
          ? "This chunk no longer exists; the index may have been rebuilt since this answer."
          : describeError(err);
      this.update({ inspector: { ...this.state.inspector, loading: false, notice } });
    }
  }

  private async runAsk(index: number, query: string): Promise<void> {
    try {
      const response = await this.api.ask(query);
      const turn = toChatTurn(query, response);
      this.update({
        turns: replaceAt(this.state.turns, index, { kind: "answered", query, turn }),
        pending: false,
        inspector: { ...emptyInspector, turnIndex: index },
      });
    } catch (err) {
      this.update({
        turns: replaceAt(this.state.turns, index, {
          kind: "error",
          query,
          message: describeError(err),
        }),
        pending: false,
      });
    }
  }

  private update(patch: Partial<AppState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener();
  }
}

function replaceAt(turns: TurnState[], index: number, turn: TurnState): TurnState[] {
  const next = [...turns];
  next[index] = turn;
  return next;
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.code} (${err.stage}): ${err.message}`;
  if (err instanceof Error) return err.message;
  return String(err);
}
