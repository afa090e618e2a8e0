/**
 * Console session: glues the stream to the feed, handles emoji feedback with
 * optimistic badges reconciled on the server ack, and steers a running
 * replay. The console mutates nothing server-side except through the
 * documented feedback and replay-control endpoints.
 */

import type { ServiceClient } from "./api.js";
import { FeedView } from "./feed.js";
import { attachLongPress } from "./longpress.js";
import { showPalette } from "./palette.js";
import type { StreamFrame } from "./types.js";

export interface SessionHooks {
  onStatus?(status: string): void;
  onToast?(text: string): void;
}

export class ConsoleSession {
  readonly feed: FeedView;
  /** messageIds with a feedback POST in flight (optimistic state). */
  readonly pendingFeedback = new Set<string>();

  constructor(
    private doc: Document,
    container: HTMLElement,
    private api: ServiceClient,
    private hooks: SessionHooks = {},
  ) {
    this.feed = new FeedView(doc, container);
  }

  handleFrame(frame: StreamFrame): void {
    this.feed.applyFrame(frame);
    if (frame.event === "message") {
      const message = frame.data.data as { messageId: string };
      const el = this.feed.messageElement(message.messageId);
      if (el) {
        attachLongPress(el, () => this.openPalette(message.messageId, el));
      }
    }
  }

  openPalette(messageId: string, anchor: HTMLElement): void {
    showPalette(this.doc, anchor, (emoji) => {
      void this.giveFeedback(messageId, emoji);
    });
  }

  async giveFeedback(messageId: string, emoji: string): Promise<void> {
    const previous = this.currentBadge(messageId);
    this.feed.setBadge(messageId, emoji); // optimistic
    this.pendingFeedback.add(messageId);
    try {
      const ack = await this.api.postFeedback(messageId, emoji);
      this.feed.setBadge(messageId, ack.emoji); // reconcile on ack
    } catch (err) {
      this.feed.setBadge(messageId, previous); // revert with a toast
      this.hooks.onToast?.(`feedback failed: ${String(err)}`);
    } finally {
      this.pendingFeedback.delete(messageId);
    }
  }

  private currentBadge(messageId: string): string | null {
    const el = this.feed.messageElement(messageId);
    const badge = el?.querySelector<HTMLElement>('[data-role="feedback"]');
    return badge?.textContent || null;
  }

  async controlReplay(command: "pause" | "resume", value?: number): Promise<void>;
  async controlReplay(command: "speed", value: number): Promise<void>;
  async controlReplay(command: "pause" | "resume" | "speed", value?: number): Promise<void> {
    await this.api.replayControl(command, value);
    this.hooks.onStatus?.(`replay ${command}${value !== undefined ? ` ${value}x` : ""}`);
  }
}
