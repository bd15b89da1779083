// Wire protocol shared with the session service: JSON text frames, one
// tagged payload per frame, every frame stamped with the session id and
// a monotone sequence number.

export const ROLL_THUMBS_UP = -90;
export const ROLL_THUMBS_DOWN = 0;

export interface GesturePayload {
  roll_deg: number;
  present: boolean;
}

export interface StartPayload {
  variant?: string;
  env?: Record<string, unknown>;
  agent?: Record<string, unknown>;
  preferences?: [number, number][];
  seed?: number;
  object_size_visible?: boolean;
  show_variant?: boolean;
}

export interface StateFrame {
  tick: number;
  episode: number;
  step: number;
  p: number;
  travel_steps: number;
  grip: number;
  grip_size: number;
  object_size_visible: boolean;
  object_size: number | null;
  retreat: boolean;
  terminal: boolean;
  last_reward: number;
  mask: string[];
  variant?: string;
}

export interface EpisodeEndFrame {
  episode: number;
  steps: number;
  pushes: number;
  reward: number;
  truncated: boolean;
}

export interface SessionSummaryFrame {
  reason: string;
  episodes_completed: number;
  total_steps: number;
  total_pushes: number;
  total_reward: number;
  ticks: number;
}

export type ServerFrame =
  | { kind: "state"; state: StateFrame }
  | { kind: "episode_end"; episodeEnd: EpisodeEndFrame }
  | { kind: "session_summary"; summary: SessionSummaryFrame }
  | { kind: "heartbeat" }
  | { kind: "error"; message: string };

export function encodeFrame(
  session: string,
  seq: number,
  tag: "start" | "gesture" | "push" | "stop",
  payload: unknown,
): string {
  return JSON.stringify({ session, seq, [tag]: payload });
}

export function decodeServerFrame(raw: string): ServerFrame | null {
  let data: Record<string, unknown>;
  try {
    data = JSON.parse(raw) as Record<string, unknown>;
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  if ("state" in data) return { kind: "state", state: data.state as StateFrame };
  if ("episode_end" in data) {
    return { kind: "episode_end", episodeEnd: data.episode_end as EpisodeEndFrame };
  }
  if ("session_summary" in data) {
    return { kind: "session_summary", summary: data.session_summary as SessionSummaryFrame };
  }
  if ("heartbeat" in data) return { kind: "heartbeat" };
  if ("error" in data) return { kind: "error", message: String(data.error) };
  return null;
}
