/**
 * Pure state reducer for the console.
 *
 * Events apply strictly in seq order; anything arriving early is buffered
 * until the gap fills, so replaying a recorded log yields the same final
 * state whatever the arrival timing. Message content is kept as segments
 * (plain text and tool chips) whose concatenated rendering reproduces the
 * server transcript exactly.
 */
import { ARROW, } from "./events.js";
export function initialState() {
    return {
        sessionId: null,
        expertSelector: "auto",
        routedExpert: null,
        messages: [],
        panel: [],
        connection: "idle",
        banner: null,
        inFlight: false,
        nextSeq: 0,
        buffered: {},
        lastTranscript: null,
    };
}
/** Chip rendering mirrors the server splice format exactly. */
export function renderChip(chip) {
    const result = chip.result ?? "";
    return `[${chip.tool}(${chip.args})${ARROW}${result}]`;
}
/** Concatenated plain segments and chip renderings == server transcript. */
export function renderedTranscript(message) {
    return message.segments
        .map((segment) => (segment.kind === "plain" ? segment.text : renderChip(segment)))
        .join("");
}
/**
 * Optimistic send: the user message renders immediately, an empty assistant
 * message opens, and input stays disabled until done or error.
 */
export function sendMessage(state, text, expert) {
    const next = {
        ...state,
        expertSelector: expert,
        routedExpert: null,
        messages: [
            ...state.messages,
            { role: "user", segments: [{ kind: "plain", text }], final: true },
            { role: "assistant", segments: [], final: false },
        ],
        panel: [],
        connection: "streaming",
        banner: null,
        inFlight: true,
        nextSeq: 0,
        buffered: {},
        lastTranscript: null,
    };
    return {
        state: next,
        request: {
            url: "/chat",
            body: {
                message: text,
                session_id: state.sessionId,
                expert: expert === "auto" ? null : expert,
            },
        },
    };
}
export function applyEvent(state, event) {
    if (event.seq < state.nextSeq) {
        return state; // duplicate or stale
    }
    if (event.seq > state.nextSeq) {
        return { ...state, buffered: { ...state.buffered, [event.seq]: event } };
    }
    let next = applyInOrder(state, event);
    next = { ...next, nextSeq: state.nextSeq + 1 };
    // drain anything the gap was holding back
    while (next.buffered[next.nextSeq] !== undefined) {
        const held = next.buffered[next.nextSeq];
        const remaining = { ...next.buffered };
        delete remaining[next.nextSeq];
        next = { ...applyInOrder(next, held), nextSeq: next.nextSeq + 1, buffered: remaining };
    }
    return next;
}
function currentAssistant(state) {
    const last = state.messages[state.messages.length - 1];
    return last && last.role === "assistant" && !last.final ? last : null;
}
function replaceLastMessage(state, message) {
    return { ...state, messages: [...state.messages.slice(0, -1), message] };
}
function applyInOrder(state, event) {
    switch (event.type) {
        case "route": {
            const payload = event.payload;
            return { ...state, routedExpert: payload.expert };
        }
        case "token": {
            const payload = event.payload;
            const message = currentAssistant(state);
            if (!message) {
                return state;
            }
            const segments = [...message.segments];
            const last = segments[segments.length - 1];
            if (last && last.kind === "plain") {
                segments[segments.length - 1] = { kind: "plain", text: last.text + payload.text };
            }
            else {
                segments.push({ kind: "plain", text: payload.text });
            }
            return replaceLastMessage(state, { ...message, segments });
        }
        case "tool_call": {
            const payload = event.payload;
            const message = currentAssistant(state);
            if (!message) {
                return state;
            }
            const chip = { kind: "chip", tool: payload.tool, args: payload.args, result: null, status: "pending" };
            return replaceLastMessage(state, { ...message, segments: [...message.segments, chip] });
        }
        case "tool_result": {
            const payload = event.payload;
            const message = currentAssistant(state);
            if (!message) {
                return state;
            }
            const segments = [...message.segments];
            for (let i = 0; i < segments.length; i += 1) {
                const segment = segments[i];
                if (segment.kind === "chip" &&
                    segment.status === "pending" &&
                    segment.tool === payload.tool &&
                    segment.args === payload.args) {
                    segments[i] = {
                        ...segment,
                        result: payload.rendered,
                        status: payload.ok ? "ok" : "error",
                    };
                    break;
                }
            }
            return replaceLastMessage(state, { ...message, segments });
        }
        case "retrieval": {
            // the panel belongs to retrieval-expert turns only
            if (state.routedExpert !== "retrieval") {
                return state;
            }
            const payload = event.payload;
            return {
                ...state,
                panel: payload.results.map((row) => ({
                    docId: row.doc_id,
                    title: row.title,
                    score: row.score,
                    injected: row.injected,
                    guaranteed: row.guaranteed,
                })),
            };
        }
        case "done": {
            const payload = event.payload;
            const message = currentAssistant(state);
            const finalized = message ? { ...message, final: true } : null;
            const base = finalized ? replaceLastMessage(state, finalized) : state;
            return {
                ...base,
                connection: "idle",
                inFlight: false,
                lastTranscript: payload.transcript,
            };
        }
        case "error": {
            const payload = event.payload;
            return {
                ...state,
                connection: "error",
                inFlight: false,
                banner: payload.message,
            };
        }
        default:
            return state;
    }
}
