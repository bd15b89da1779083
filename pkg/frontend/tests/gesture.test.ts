import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { GestureScheduler } from "../src/gesture.js";
import type { GesturePayload } from "../src/protocol.js";

describe("gesture scheduler", () => {
  let sent: GesturePayload[];
  let scheduler: GestureScheduler;

  beforeEach(() => {
    vi.useFakeTimers();
    sent = [];
    scheduler = new GestureScheduler((p) => sent.push(p), () => Date.now());
  });

  afterEach(() => {
    scheduler.stop();
    vi.useRealTimers();
  });

  it("holding thumbs-up for one second emits ten frames at roll -90", () => {
    scheduler.press("up");
    vi.advanceTimersByTime(999);
    expect(sent.length).toBe(10); // immediate frame plus one per 100 ms
    expect(sent.every((p) => p.roll_deg === -90 && p.present)).toBe(true);
  });

  it("holding thumbs-down emits roll 0 frames", () => {
    scheduler.press("down");
    vi.advanceTimersByTime(250);
    expect(sent.length).toBe(3);
    expect(sent.every((p) => p.roll_deg === 0 && p.present)).toBe(true);
  });

  it("release sends a single present=false frame and stops the stream", () => {
    scheduler.press("up");
    vi.advanceTimersByTime(310);
    const during = sent.length;
    scheduler.release("up");
    vi.advanceTimersByTime(500);
    expect(sent.length).toBe(during + 1);
    expect(sent.at(-1)).toEqual({ roll_deg: 0, present: false });
  });

  it("releasing a key that is not held does nothing", () => {
    scheduler.press("up");
    scheduler.release("down");
    vi.advanceTimersByTime(200);
    expect(sent.every((p) => p.present)).toBe(true);
  });

  it("never exceeds one frame per 100 ms window", () => {
    // hammer press/release/press switches inside a single window
    scheduler.press("up");
    scheduler.press("down");
    scheduler.press("up");
    vi.advanceTimersByTime(50);
    scheduler.press("down");
    vi.advanceTimersByTime(949);
    const presentFrames = sent.filter((p) => p.present);
    expect(presentFrames.length).toBeLessThanOrEqual(10);
  });

  it("switching the held kind mid-stream changes the emitted roll", () => {
    scheduler.press("up");
    vi.advanceTimersByTime(200);
    scheduler.press("down");
    vi.advanceTimersByTime(200);
    expect(sent[0].roll_deg).toBe(-90);
    expect(sent.at(-1)!.roll_deg).toBe(0);
  });
});
