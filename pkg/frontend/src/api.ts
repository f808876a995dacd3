/** Service client: SSE-framed chat plus the small JSON endpoints. */

import { ChatEvent } from "./events.js";
import { OutboundRequest } from "./reducer.js";

export interface ExpertInfo {
  id: string;
  adapter: string;
  tools_enabled: boolean;
  retrieval_enabled: boolean;
}

export async function fetchExperts(): Promise<ExpertInfo[]> {
  const response = await fetch("/experts");
  if (!response.ok) {
    throw new Error(`GET /experts failed: ${response.status}`);
  }
  const body = (await response.json()) as { experts: ExpertInfo[] };
  return body.experts;
}

export async function fetchHealth(): Promise<{ status: string; backend: boolean; index_loaded: boolean }> {
  const response = await fetch("/health");
  if (!response.ok) {
    throw new Error(`GET /health failed: ${response.status}`);
  }
  return response.json();
}

/**
 * POST /chat and hand each SSE frame's ChatEvent to the callback in arrival
 * order. Resolves with the session id from the response headers.
 */
export async function streamChat(
  request: OutboundRequest,
  onEvent: (event: ChatEvent) => void,
): Promise<string | null> {
  const response = await fetch(request.url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(request.body),
  });
  if (!response.ok || !response.body) {
    throw new Error(`POST /chat failed: ${response.status}`);
  }
  const sessionId = response.headers.get("X-Session-Id");

  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  let pending = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) {
      break;
    }
    pending += decoder.decode(value, { stream: true });
    for (;;) {
      const boundary = pending.indexOf("\n\n");
      if (boundary === -1) {
        break;
      }
      const frame = pending.slice(0, boundary);
      pending = pending.slice(boundary + 2);
      const line = frame.trim();
      if (line.startsWith("data: ")) {
        onEvent(JSON.parse(line.slice("data: ".length)) as ChatEvent);
      }
    }
  }
  return sessionId;
}
