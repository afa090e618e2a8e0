/**
 * Chat feed rendering. Each message renders as one bubble per segment plus
 * an optional sticker; triggers render as a subtle system chip naming the
 * scenario. Rendering is a pure function of the received record, so the
 * produced DOM is snapshot-testable.
 */

import type { MessageRecord, StreamFrame, TriggerRecord } from "./types.js";

export function renderTriggerChip(doc: Document, trigger: TriggerRecord): HTMLElement {
  const chip = doc.createElement("div");
  chip.className = "chip";
  chip.dataset.scenario = trigger.scenarioId;
  chip.textContent = trigger.scenarioId.replace(/_/g, " ");
  chip.title = new Date(trigger.firedAt).toISOString();
  return chip;
}

export function renderMessage(doc: Document, message: MessageRecord): HTMLElement {
  const wrap = doc.createElement("div");
  wrap.className = `message sentiment-${message.sentiment.label}`;
  wrap.dataset.messageId = message.messageId;
  if (message.scenarioId) wrap.dataset.scenario = message.scenarioId;
  for (const segment of message.segments) {
    const bubble = doc.createElement("div");
    bubble.className = "bubble";
    bubble.textContent = segment.trim();
    wrap.appendChild(bubble);
  }
  if (message.sticker) {
    const sticker = doc.createElement("img");
    sticker.className = "sticker";
    sticker.src = message.sticker;
    sticker.alt = "sticker";
    wrap.appendChild(sticker);
  }
  const badge = doc.createElement("span");
  badge.className = "feedback-badge";
  badge.dataset.role = "feedback";
  wrap.appendChild(badge);
  return wrap;
}

export class FeedView {
  readonly root: HTMLElement;
  private byMessageId = new Map<string, HTMLElement>();
  private seenFrameIds = new Set<number>();

  constructor(private doc: Document, container: HTMLElement) {
    this.root = container;
    this.root.classList.add("feed");
  }

  /** Apply one stream frame; duplicate frame ids are ignored (resume safety). */
  applyFrame(frame: StreamFrame): void {
    if (this.seenFrameIds.has(frame.id)) return;
    this.seenFrameIds.add(frame.id);
    if (frame.event === "trigger") {
      this.root.appendChild(renderTriggerChip(this.doc, frame.data.data as TriggerRecord));
    } else {
      const message = frame.data.data as MessageRecord;
      const el = renderMessage(this.doc, message);
      this.byMessageId.set(message.messageId, el);
      this.root.appendChild(el);
    }
  }

  messageElement(messageId: string): HTMLElement | undefined {
    return this.byMessageId.get(messageId);
  }

  messageCount(): number {
    return this.byMessageId.size;
  }

  setBadge(messageId: string, emoji: string | null): void {
    const el = this.byMessageId.get(messageId);
    if (!el) return;
    const badge = el.querySelector<HTMLElement>('[data-role="feedback"]');
    if (badge) badge.textContent = emoji ?? "";
  }
}
