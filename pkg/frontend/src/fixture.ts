/**
 * Fixture mode: plays a recorded stream file on a timer, honoring the same
 * pause/resume/speed controls a live replay accepts, so the whole UI can be
 * exercised offline.
 */

import type { StreamFrame } from "./types.js";

type Clock = {
  setTimeout: typeof setTimeout;
  clearTimeout: typeof clearTimeout;
};

export class FixturePlayer {
  private index = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private paused = false;
  private speed = 1.0;
  private defaultGapMs: number;

  constructor(
    private frames: StreamFrame[],
    private onFrame: (frame: StreamFrame) => void,
    options: { defaultGapMs?: number; clock?: Clock } = {},
  ) {
    this.defaultGapMs = options.defaultGapMs ?? 400;
    this.clock = options.clock ?? { setTimeout, clearTimeout };
  }

  private clock: Clock;

  get active(): boolean {
    return this.index < this.frames.length;
  }

  get delivered(): number {
    return this.index;
  }

  start(): void {
    this.schedule(0);
  }

  pause(): void {
    this.paused = true;
    if (this.timer !== null) {
      this.clock.clearTimeout(this.timer);
      this.timer = null;
    }
  }

  resume(): void {
    if (!this.paused) return;
    this.paused = false;
    this.schedule(this.gapMs());
  }

  setSpeed(speed: number): void {
    if (speed <= 0) throw new Error("speed must be positive");
    this.speed = speed;
  }

  stop(): void {
    this.pause();
    this.index = this.frames.length;
  }

  private gapMs(): number {
    const current = this.frames[this.index];
    const previous = this.frames[this.index - 1];
    const eventGap =
      current && previous ? Math.max(current.data.t - previous.data.t, 0) : this.defaultGapMs;
    return Math.min(eventGap, this.defaultGapMs) / this.speed;
  }

  private schedule(delayMs: number): void {
    if (this.paused || !this.active) return;
    this.timer = this.clock.setTimeout(() => {
      this.timer = null;
      if (this.paused || !this.active) return;
      const frame = this.frames[this.index];
      this.index += 1;
      if (frame) this.onFrame(frame);
      if (this.active) this.schedule(this.gapMs());
    }, delayMs);
  }
}
