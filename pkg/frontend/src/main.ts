// Wiring: URL query -> session config, keyboard/buttons -> gesture
// scheduler and push clicks, server frames -> view state -> canvas.
//
// Query parameters: ?server=ws://127.0.0.1:8736&session=demo&variant=siv
//                   &object_visible=0&seed=42

import { GestureScheduler } from "./gesture.js";
import { SessionChannel } from "./net.js";
import type { StartPayload } from "./protocol.js";
import { render } from "./render.js";
import { applyConnection, applyServerFrame, initialViewState, ViewState } from "./state.js";

const params = new URLSearchParams(window.location.search);
const serverUrl = params.get("server") ?? "ws://127.0.0.1:8736";
const sessionId = params.get("session") ?? `op-${Date.now().toString(36)}`;

const startPayload: StartPayload = {
  variant: params.get("variant") ?? "siv",
  seed: Number(params.get("seed") ?? 0),
  object_size_visible: params.get("object_visible") !== "0",
};

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
let view: ViewState = initialViewState();

const channel = new SessionChannel(sessionId, (dropped) => {
  view = { ...view, lastError: `transport down, dropped ${dropped} stale frame(s)` };
});
const gestures = new GestureScheduler((payload) => channel.send("gesture", payload));

function connect(isReconnect: boolean): void {
  const socket = new WebSocket(`${serverUrl}/ws/${sessionId}`);
  socket.onopen = () => {
    channel.attach(socket);
    if (!isReconnect) channel.send("start", startPayload);
    view = applyConnection(view, "open");
  };
  socket.onmessage = (event) => {
    const frame = channel.decode(String(event.data));
    if (frame !== null) view = applyServerFrame(view, frame);
  };
  socket.onclose = () => {
    channel.detach();
    if (view.connection !== "closed") {
      view = applyConnection(view, "paused");
      setTimeout(() => connect(true), 1000);
    }
  };
}

function pushClick(): void {
  channel.send("push");
}

function stopSession(): void {
  gestures.stop();
  channel.send("stop");
}

const keyToGesture: Record<string, "up" | "down"> = {
  ArrowUp: "up",
  KeyU: "up",
  ArrowDown: "down",
  KeyD: "down",
};

window.addEventListener("keydown", (event) => {
  if (event.repeat) return;
  const kind = keyToGesture[event.code];
  if (kind) {
    gestures.press(kind);
    event.preventDefault();
  } else if (event.code === "Space") {
    pushClick();
    event.preventDefault();
  } else if (event.code === "Escape") {
    stopSession();
  }
});
window.addEventListener("keyup", (event) => {
  const kind = keyToGesture[event.code];
  if (kind) gestures.release(kind);
});

function bindHold(id: string, kind: "up" | "down"): void {
  const el = document.getElementById(id)!;
  el.addEventListener("pointerdown", () => {
    view = { ...view, inputMode: "buttons" };
    gestures.press(kind);
  });
  for (const evt of ["pointerup", "pointerleave", "pointercancel"]) {
    el.addEventListener(evt, () => gestures.release(kind));
  }
}
bindHold("thumbs-up", "up");
bindHold("thumbs-down", "down");
document.getElementById("push")!.addEventListener("click", pushClick);
document.getElementById("stop")!.addEventListener("click", stopSession);

function paint(): void {
  render(ctx, view);
  requestAnimationFrame(paint);
}

connect(false);
requestAnimationFrame(paint);
