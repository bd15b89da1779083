// Session transport: sequence numbering, a one-second send buffer while
// the socket is down, and frame decoding for the view layer.

import { decodeServerFrame, encodeFrame, ServerFrame } from "./protocol.js";

export const SEND_BUFFER_MS = 1000;

interface Buffered {
  tag: "start" | "gesture" | "push" | "stop";
  payload: unknown;
  queuedAt: number;
}

export interface SocketLike {
  readyState: number;
  send(data: string): void;
}

const OPEN = 1;

export class SessionChannel {
  private seq = 0;
  private buffer: Buffered[] = [];
  private socket: SocketLike | null = null;

  constructor(
    readonly sessionId: string,
    private readonly onDrop: (count: number) => void = () => {},
    private readonly now: () => number = () => Date.now(),
  ) {}

  attach(socket: SocketLike): void {
    this.socket = socket;
    this.flush();
  }

  detach(): void {
    this.socket = null;
  }

  send(tag: "start" | "gesture" | "push" | "stop", payload: unknown = true): void {
    if (this.socket !== null && this.socket.readyState === OPEN) {
      this.seq += 1;
      this.socket.send(encodeFrame(this.sessionId, this.seq, tag, payload));
      return;
    }
    this.buffer.push({ tag, payload, queuedAt: this.now() });
  }

  flush(): void {
    const cutoff = this.now() - SEND_BUFFER_MS;
    const fresh = this.buffer.filter((b) => b.queuedAt >= cutoff);
    const dropped = this.buffer.length - fresh.length;
    if (dropped > 0) this.onDrop(dropped);
    this.buffer = [];
    for (const item of fresh) {
      this.send(item.tag, item.payload);
    }
  }

  get pending(): number {
    return this.buffer.length;
  }

  decode(raw: string): ServerFrame | null {
    return decodeServerFrame(raw);
  }
}
