// Replay steering on the fixture player: pause stalls the feed (zero new
// messages for a full five seconds), resume continues without loss.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { FixturePlayer } from "../src/fixture.js";
import type { StreamFrame } from "../src/types.js";

const FIXTURE: StreamFrame[] = JSON.parse(
  readFileSync(join(__dirname, "fixtures", "stream-recorded.json"), "utf-8"),
);

describe("fixture replay control", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("pause yields zero new messages for five seconds; resume loses nothing", () => {
    const seen: StreamFrame[] = [];
    const player = new FixturePlayer(FIXTURE, (f) => seen.push(f), { defaultGapMs: 100 });
    player.start();
    vi.advanceTimersByTime(250); // a couple of frames arrive
    const before = seen.length;
    expect(before).toBeGreaterThan(0);
    expect(before).toBeLessThan(FIXTURE.length);

    player.pause();
    vi.advanceTimersByTime(5_000);
    expect(seen.length).toBe(before); // feed visibly stalls

    player.resume();
    vi.advanceTimersByTime(10_000);
    expect(seen.length).toBe(FIXTURE.length); // no events lost
    expect(seen.map((f) => f.id)).toEqual(FIXTURE.map((f) => f.id));
  });

  it("speed change shortens the inter-frame pacing", () => {
    const slow: number[] = [];
    const fast: number[] = [];
    const mk = (sink: number[], speed: number) => {
      const player = new FixturePlayer(FIXTURE, () => sink.push(Date.now()), {
        defaultGapMs: 1000,
      });
      player.setSpeed(speed);
      player.start();
      return player;
    };
    mk(slow, 1);
    vi.advanceTimersByTime(2_000);
    expect(slow.length).toBeLessThanOrEqual(3);

    vi.clearAllTimers();
    mk(fast, 10);
    vi.advanceTimersByTime(2_000);
    expect(fast.length).toBe(FIXTURE.length);
  });

  it("stop ends delivery permanently", () => {
    const seen: StreamFrame[] = [];
    const player = new FixturePlayer(FIXTURE, (f) => seen.push(f), { defaultGapMs: 50 });
    player.start();
    vi.advanceTimersByTime(120);
    player.stop();
    const at = seen.length;
    vi.advanceTimersByTime(60_000);
    expect(seen.length).toBe(at);
    expect(player.active).toBe(false);
  });
});
