/**
 * Reducer replay acceptance: a recorded event log (tokens, one
 * tool_call/result pair, a retrieval set, done) must produce the exact
 * expected final state, the rendered transcript must equal done.transcript,
 * and arrival order must not matter.
 */

import assert from "node:assert/strict";
import { test } from "node:test";

import { ChatEvent } from "../src/events.js";
import {
  UiSessionState,
  applyEvent,
  initialState,
  renderedTranscript,
  sendMessage,
} from "../src/reducer.js";

const TRANSCRIPT = "增长额为[Calculator(100*0.2)→20]，即20万元。";

/** One recorded turn, exactly as the service frames it. */
function recordedLog(): ChatEvent[] {
  return [
    {
      type: "route",
      seq: 0,
      payload: { expert: "retrieval", source: "explicit", matched: null, scores: { consulting: 0, task: 0, computing: 1, retrieval: 2 } },
    },
    {
      type: "retrieval",
      seq: 1,
      payload: {
        results: [
          { doc_id: "kb-1", seq: 0, score: 2.31, title: "新能源观察", text: "……", injected: false, guaranteed: false },
          { doc_id: "kb-7", seq: 0, score: 1.02, title: "行业综述", text: "……", injected: false, guaranteed: true },
          { doc_id: "kb-9", seq: 2, score: 0.0, title: "无关材料", text: "……", injected: true, guaranteed: false },
        ],
      },
    },
    { type: "token", seq: 2, payload: { text: "增长额为" } },
    { type: "tool_call", seq: 3, payload: { tool: "Calculator", args: "100*0.2", span: [4, 21] } },
    {
      type: "tool_result",
      seq: 4,
      payload: { tool: "Calculator", args: "100*0.2", rendered: "20", ok: true, error_kind: null, resumed_at: 22 },
    },
    { type: "token", seq: 5, payload: { text: "，即20万元。" } },
    {
      type: "done",
      seq: 6,
      payload: {
        transcript: TRANSCRIPT,
        finish_reason: "stop",
        metadata: { adapter: "lora-retrieval", expert: "retrieval", budget_exceeded: false, usage: {} },
      },
    },
  ];
}

function startTurn(): UiSessionState {
  return sendMessage(initialState(), "营收增长了多少？", "retrieval").state;
}

function expectedFinalState(): UiSessionState {
  return {
    sessionId: null,
    expertSelector: "retrieval",
    routedExpert: "retrieval",
    messages: [
      { role: "user", segments: [{ kind: "plain", text: "营收增长了多少？" }], final: true },
      {
        role: "assistant",
        final: true,
        segments: [
          { kind: "plain", text: "增长额为" },
          { kind: "chip", tool: "Calculator", args: "100*0.2", result: "20", status: "ok" },
          { kind: "plain", text: "，即20万元。" },
        ],
      },
    ],
    panel: [
      { docId: "kb-1", title: "新能源观察", score: 2.31, injected: false, guaranteed: false },
      { docId: "kb-7", title: "行业综述", score: 1.02, injected: false, guaranteed: true },
      { docId: "kb-9", title: "无关材料", score: 0.0, injected: true, guaranteed: false },
    ],
    connection: "idle",
    banner: null,
    inFlight: false,
    nextSeq: 7,
    buffered: {},
    lastTranscript: TRANSCRIPT,
  };
}

test("replaying the recorded log yields the exact expected final state", () => {
  let state = startTurn();
  for (const event of recordedLog()) {
    state = applyEvent(state, event);
  }
  assert.deepEqual(state, expectedFinalState());
});

test("transcript fidelity: rendered message equals done.transcript", () => {
  let state = startTurn();
  for (const event of recordedLog()) {
    state = applyEvent(state, event);
  }
  const assistant = state.messages[state.messages.length - 1];
  assert.equal(renderedTranscript(assistant), TRANSCRIPT);
  assert.equal(renderedTranscript(assistant), state.lastTranscript);
});

test("replay determinism: any arrival order yields the same final state", () => {
  const log = recordedLog();
  const permutations: ChatEvent[][] = [
    [...log].reverse(),
    [log[3], log[0], log[6], log[1], log[5], log[2], log[4]],
    [log[1], log[2], log[0], log[4], log[3], log[6], log[5]],
  ];
  for (const order of permutations) {
    let state = startTurn();
    for (const event of order) {
      state = applyEvent(state, event);
    }
    assert.deepEqual(state, expectedFinalState());
  }
});

test("out-of-order events buffer until the gap fills", () => {
  const log = recordedLog();
  let state = startTurn();
  state = applyEvent(state, log[0]);
  state = applyEvent(state, log[2]); // seq 2 arrives before seq 1
  assert.equal(state.nextSeq, 1);
  assert.equal(Object.keys(state.buffered).length, 1);
  assert.equal(renderedTranscript(state.messages[1]), ""); // token held back
  state = applyEvent(state, log[1]);
  assert.equal(state.nextSeq, 3);
  assert.deepEqual(state.buffered, {});
  assert.equal(renderedTranscript(state.messages[1]), "增长额为");
});

test("duplicate and stale events are ignored", () => {
  const log = recordedLog();
  let state = startTurn();
  for (const event of log) {
    state = applyEvent(state, event);
  }
  const replayed = applyEvent(state, log[2]);
  assert.deepEqual(replayed, expectedFinalState());
});

test("tool errors resolve the chip with error status", () => {
  let state = startTurn();
  state = applyEvent(state, {
    type: "route",
    seq: 0,
    payload: { expert: "computing", source: "explicit", matched: null, scores: {} },
  });
  state = applyEvent(state, { type: "tool_call", seq: 1, payload: { tool: "Calculator", args: "1/0", span: [0, 16] } });
  state = applyEvent(state, {
    type: "tool_result",
    seq: 2,
    payload: { tool: "Calculator", args: "1/0", rendered: "ERROR: MathError", ok: false, error_kind: "MathError", resumed_at: 34 },
  });
  const assistant = state.messages[1];
  const chip = assistant.segments[0];
  assert.equal(chip.kind, "chip");
  if (chip.kind === "chip") {
    assert.equal(chip.status, "error");
    assert.equal(chip.result, "ERROR: MathError");
  }
  assert.equal(renderedTranscript(assistant), "[Calculator(1/0)→ERROR: MathError]");
});

test("retrieval panel only populates on retrieval-expert turns", () => {
  let state = startTurn();
  state = applyEvent(state, {
    type: "route",
    seq: 0,
    payload: { expert: "consulting", source: "default", matched: null, scores: {} },
  });
  state = applyEvent(state, {
    type: "retrieval",
    seq: 1,
    payload: { results: [{ doc_id: "kb-1", seq: 0, score: 1.0, title: "t", text: "x", injected: false, guaranteed: false }] },
  });
  assert.deepEqual(state.panel, []);
});

test("error event renders a failure banner and re-enables input", () => {
  let state = startTurn();
  assert.equal(state.inFlight, true);
  state = applyEvent(state, {
    type: "route",
    seq: 0,
    payload: { expert: "consulting", source: "default", matched: null, scores: {} },
  });
  state = applyEvent(state, { type: "error", seq: 1, payload: { message: "backend unreachable", kind: "BackendUnavailable" } });
  assert.equal(state.connection, "error");
  assert.equal(state.banner, "backend unreachable");
  assert.equal(state.inFlight, false);
});

test("sendMessage builds the outbound request and optimistic state", () => {
  const { state, request } = sendMessage(initialState(), "你好", "computing");
  assert.deepEqual(request, {
    url: "/chat",
    body: { message: "你好", session_id: null, expert: "computing" },
  });
  assert.equal(state.messages.length, 2);
  assert.equal(state.messages[0].role, "user");
  assert.equal(state.inFlight, true);

  const auto = sendMessage(initialState(), "你好", "auto");
  assert.equal(auto.request.body.expert, null);
});
