/**
 * Live stream client: fetch-based server-sent-events reader.
 *
 * EventSource cannot send an Authorization header, so frames are parsed off
 * a streamed fetch body instead. On drop the client reconnects with the
 * last seen event id, which the service replays from its retention buffer,
 * so a brief outage loses nothing.
 */

import type { StreamFrame } from "./types.js";

export interface StreamCallbacks {
  onFrame(frame: StreamFrame): void;
  onStatus?(status: "connecting" | "open" | "reconnecting" | "closed"): void;
}

/** Parse the accumulated text buffer, returning frames and the remainder. */
export function parseSseChunk(buffer: string): { frames: StreamFrame[]; rest: string } {
  const frames: StreamFrame[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    let id = 0;
    let event = "";
    let data = "";
    for (const line of block.split("\n")) {
      if (line.startsWith("id: ")) id = Number(line.slice(4));
      else if (line.startsWith("event: ")) event = line.slice(7);
      else if (line.startsWith("data: ")) data = line.slice(6);
      // comment lines (keepalives) fall through
    }
    if (event === "trigger" || event === "message") {
      frames.push({ id, event, data: JSON.parse(data) });
    }
  }
  return { frames, rest };
}

export class StreamClient {
  lastEventId = 0;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(
    private baseUrl: string,
    private token: string,
    private callbacks: StreamCallbacks,
    private fetchFn: typeof fetch = fetch,
    private reconnectDelayMs = 1000,
  ) {}

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
    this.callbacks.onStatus?.("closed");
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      this.callbacks.onStatus?.(this.lastEventId === 0 ? "connecting" : "reconnecting");
      try {
        await this.consumeOnce();
      } catch {
        // fall through to reconnect
      }
      if (this.stopped) return;
      await new Promise((resolve) => setTimeout(resolve, this.reconnectDelayMs));
    }
  }

  private async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const resp = await this.fetchFn(`${this.baseUrl}/api/v1/stream`, {
      headers: {
        Authorization: `Bearer ${this.token}`,
        "Last-Event-ID": String(this.lastEventId),
        Accept: "text/event-stream",
      },
      signal: this.controller.signal,
    });
    if (!resp.ok || !resp.body) throw new Error(`stream failed: ${resp.status}`);
    this.callbacks.onStatus?.("open");
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    while (!this.stopped) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const { frames, rest } = parseSseChunk(buffer);
      buffer = rest;
      for (const frame of frames) {
        if (frame.id > this.lastEventId) {
          this.lastEventId = frame.id;
          this.callbacks.onFrame(frame);
        }
      }
    }
  }
}
