/** Chat event frames as the service emits them (docs/interface.md §3). */

export type EventType =
  | "route"
  | "token"
  | "tool_call"
  | "tool_result"
  | "retrieval"
  | "done"
  | "error";

export interface RoutePayload {
  expert: string;
  source: "explicit" | "rule" | "default";
  matched: string | null;
  scores: Record<string, number>;
}

export interface TokenPayload {
  text: string;
}

export interface ToolCallPayload {
  tool: string;
  args: string;
  span: [number, number];
}

export interface ToolResultPayload {
  tool: string;
  args: string;
  rendered: string;
  ok: boolean;
  error_kind: string | null;
  resumed_at: number;
}

export interface RetrievalRowPayload {
  doc_id: string;
  seq: number;
  score: number;
  title: string;
  text: string;
  injected: boolean;
  guaranteed: boolean;
}

export interface RetrievalPayload {
  results: RetrievalRowPayload[];
}

export interface DonePayload {
  transcript: string;
  finish_reason: string;
  metadata: {
    adapter: string;
    expert: string;
    budget_exceeded: boolean;
    usage: Record<string, unknown>;
  };
}

export interface ErrorPayload {
  message: string;
  kind?: string;
}

export interface ChatEvent {
  type: EventType;
  seq: number;
  payload:
    | RoutePayload
    | TokenPayload
    | ToolCallPayload
    | ToolResultPayload
    | RetrievalPayload
    | DonePayload
    | ErrorPayload
    | Record<string, unknown>;
}

export const ARROW = "→";
