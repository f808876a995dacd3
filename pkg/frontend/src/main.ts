/** DOM wiring: a single-page console over the documented event protocol. */

import { fetchExperts, fetchHealth, streamChat } from "./api.js";
import {
  UiSessionState,
  applyEvent,
  initialState,
  renderChip,
  renderedTranscript,
  sendMessage,
} from "./reducer.js";

let state: UiSessionState = initialState();

const messagesEl = document.getElementById("messages") as HTMLDivElement;
const panelEl = document.getElementById("panel") as HTMLDivElement;
const inputEl = document.getElementById("input") as HTMLInputElement;
const sendEl = document.getElementById("send") as HTMLButtonElement;
const expertEl = document.getElementById("expert") as HTMLSelectElement;
const statusEl = document.getElementById("status") as HTMLSpanElement;
const bannerEl = document.getElementById("banner") as HTMLDivElement;

function render(): void {
  messagesEl.replaceChildren(
    ...state.messages.map((message) => {
      const wrapper = document.createElement("div");
      wrapper.className = `message ${message.role}`;
      for (const segment of message.segments) {
        if (segment.kind === "plain") {
          wrapper.append(document.createTextNode(segment.text));
        } else {
          const chip = document.createElement("span");
          chip.className = `chip ${segment.status}`;
          chip.textContent = renderChip(segment);
          chip.title = `${segment.tool}(${segment.args})`;
          wrapper.append(chip);
        }
      }
      if (!message.final && message.role === "assistant") {
        const cursor = document.createElement("span");
        cursor.className = "cursor";
        cursor.textContent = "▌";
        wrapper.append(cursor);
      }
      return wrapper;
    }),
  );
  messagesEl.scrollTop = messagesEl.scrollHeight;

  panelEl.replaceChildren();
  if (state.panel.length > 0) {
    const heading = document.createElement("h3");
    heading.textContent = "参考文档";
    panelEl.append(heading);
    for (const row of state.panel) {
      const item = document.createElement("div");
      item.className = "panel-row" + (row.injected ? " injected" : "");
      const flags = [row.injected ? "噪声" : "", row.guaranteed ? "来源" : ""].filter(Boolean).join(" ");
      item.textContent = `${row.title || row.docId}  score=${row.score.toFixed(3)}${flags ? `  [${flags}]` : ""}`;
      panelEl.append(item);
    }
  }

  sendEl.disabled = state.inFlight || inputEl.value.trim() === "";
  inputEl.disabled = state.inFlight;
  statusEl.textContent = state.connection;
  statusEl.className = `status ${state.connection}`;
  if (state.banner) {
    bannerEl.textContent = state.banner;
    bannerEl.style.display = "block";
  } else {
    bannerEl.style.display = "none";
  }
}

function dispatch(event: Parameters<typeof applyEvent>[1]): void {
  state = applyEvent(state, event);
  if (event.type === "done" && state.lastTranscript !== null) {
    const message = state.messages[state.messages.length - 1];
    if (message && renderedTranscript(message) !== state.lastTranscript) {
      console.warn("transcript mismatch between rendered segments and done.transcript");
    }
  }
  render();
}

async function submit(): Promise<void> {
  const text = inputEl.value.trim();
  if (!text || state.inFlight) {
    return;
  }
  inputEl.value = "";
  const outcome = sendMessage(state, text, expertEl.value);
  state = outcome.state;
  render();
  try {
    const sessionId = await streamChat(outcome.request, dispatch);
    if (sessionId && !state.sessionId) {
      state = { ...state, sessionId };
    }
  } catch (error) {
    state = {
      ...state,
      inFlight: false,
      connection: "error",
      banner: `发送失败：${error instanceof Error ? error.message : String(error)}（可重试）`,
    };
    render();
  }
}

async function boot(): Promise<void> {
  sendEl.addEventListener("click", submit);
  inputEl.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void submit();
    }
  });
  inputEl.addEventListener("input", render);

  try {
    const experts = await fetchExperts();
    for (const expert of experts) {
      const option = document.createElement("option");
      option.value = expert.id;
      option.textContent = expert.id;
      expertEl.append(option);
    }
  } catch {
    // selector keeps only "auto" when the service is down
  }
  try {
    const health = await fetchHealth();
    statusEl.textContent = health.status === "ok" ? "idle" : "error";
  } catch {
    statusEl.textContent = "error";
  }
  render();
}

void boot();
