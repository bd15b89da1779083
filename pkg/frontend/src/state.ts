// View state mirrors server-acknowledged frames only; nothing here
// predicts ahead of the last state the server sent.

import type {
  EpisodeEndFrame,
  ServerFrame,
  SessionSummaryFrame,
  StateFrame,
} from "./protocol.js";

export type Connection = "connecting" | "open" | "paused" | "closed";

export interface ViewState {
  connection: Connection;
  server: StateFrame | null;
  lastEpisode: EpisodeEndFrame | null;
  summary: SessionSummaryFrame | null;
  pushesThisEpisode: number;
  lastError: string | null;
  inputMode: "keyboard" | "buttons";
}

export function initialViewState(): ViewState {
  return {
    connection: "connecting",
    server: null,
    lastEpisode: null,
    summary: null,
    pushesThisEpisode: 0,
    lastError: null,
    inputMode: "keyboard",
  };
}

export function applyConnection(view: ViewState, connection: Connection): ViewState {
  return { ...view, connection };
}

export function applyServerFrame(view: ViewState, frame: ServerFrame): ViewState {
  switch (frame.kind) {
    case "state": {
      const startedNewEpisode =
        view.server !== null && frame.state.episode !== view.server.episode;
      const pushes =
        (startedNewEpisode ? 0 : view.pushesThisEpisode) +
        (frame.state.last_reward < 0 ? 1 : 0);
      return { ...view, server: frame.state, pushesThisEpisode: pushes };
    }
    case "episode_end":
      return { ...view, lastEpisode: frame.episodeEnd };
    case "session_summary":
      return { ...view, summary: frame.summary, connection: "closed" };
    case "error":
      return { ...view, lastError: frame.message };
    case "heartbeat":
      return view;
  }
}
