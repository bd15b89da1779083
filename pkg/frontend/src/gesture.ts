// Gesture scheduling: while a thumbs-up or thumbs-down input is held,
// one gesture frame goes out per 100 ms window; releasing sends a single
// present=false frame. The first frame of a press goes out immediately
// unless a frame already went out in the current window.

import { GesturePayload, ROLL_THUMBS_DOWN, ROLL_THUMBS_UP } from "./protocol.js";

export type GestureKind = "up" | "down";

export const GESTURE_PERIOD_MS = 100;

type Send = (payload: GesturePayload) => void;
type Clock = () => number;

export class GestureScheduler {
  private held: GestureKind | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private lastSentAt = -Infinity;

  constructor(
    private readonly send: Send,
    private readonly now: Clock = () => Date.now(),
  ) {}

  get heldKind(): GestureKind | null {
    return this.held;
  }

  press(kind: GestureKind): void {
    this.held = kind;
    if (this.now() - this.lastSentAt >= GESTURE_PERIOD_MS) {
      this.emit();
    }
    if (this.timer === null) {
      this.timer = setInterval(() => this.emit(), GESTURE_PERIOD_MS);
    }
  }

  release(kind?: GestureKind): void {
    if (kind !== undefined && this.held !== kind) return;
    if (this.held === null) return;
    this.held = null;
    this.stopTimer();
    this.send({ roll_deg: ROLL_THUMBS_DOWN, present: false });
    this.lastSentAt = this.now();
  }

  stop(): void {
    this.held = null;
    this.stopTimer();
  }

  private stopTimer(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private emit(): void {
    if (this.held === null) return;
    const roll = this.held === "up" ? ROLL_THUMBS_UP : ROLL_THUMBS_DOWN;
    this.send({ roll_deg: roll, present: true });
    this.lastSentAt = this.now();
  }
}
