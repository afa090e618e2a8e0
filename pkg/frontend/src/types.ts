/** Wire records mirrored from the sync service API. */

export interface TriggerRecord {
  scenarioId: string;
  firedAt: number;
  evidenceWindow: [number, number];
  metrics: Record<string, number>;
  cooldownKey: string;
}

export interface SentimentInfo {
  label: "positive" | "neutral" | "negative";
  score: number;
}

export interface MessageRecord {
  messageId: string;
  scenarioId: string | null;
  segments: string[];
  sticker: string | null;
  sentiment: SentimentInfo;
  t: number;
}

export interface FeedbackRecord {
  messageId: string;
  emoji: string;
  userId: string;
  t: number;
}

/** One frame from the live stream (or a recorded fixture of it). */
export interface StreamFrame {
  id: number;
  event: "trigger" | "message";
  data: { type: string; t: number; data: TriggerRecord | MessageRecord };
}

export const EMOJI_PALETTE = ["\u{1F44D}", "❤️", "\u{1F602}", "\u{1F62E}", "\u{1F622}", "\u{1F44E}"] as const;

export type ReplayCommand = "pause" | "resume" | "speed" | "seek" | "stop";
