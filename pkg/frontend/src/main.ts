/** Browser entry point: loads config.json, logs in, wires stream to feed. */

import { ServiceClient } from "./api.js";
import { ConsoleSession } from "./session.js";
import { StreamClient } from "./stream.js";
import { FixturePlayer } from "./fixture.js";
import type { StreamFrame } from "./types.js";

interface ConsoleConfig {
  serviceUrl: string;
  userId: string;
  secret: string;
  fixtureFile?: string; // offline mode: replay a recorded stream file
}

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el;
}

async function boot(): Promise<void> {
  const config = (await (await fetch("./config.json")).json()) as ConsoleConfig;
  const api = new ServiceClient(config.serviceUrl);
  const banner = byId("banner");
  const session = new ConsoleSession(document, byId("feed"), api, {
    onStatus: (s) => (banner.textContent = s),
    onToast: (t) => (banner.textContent = t),
  });

  const pauseBtn = byId("pause") as HTMLButtonElement;
  const resumeBtn = byId("resume") as HTMLButtonElement;
  const speedInput = byId("speed") as HTMLInputElement;

  if (config.fixtureFile) {
    const frames = (await (await fetch(config.fixtureFile)).json()) as StreamFrame[];
    const player = new FixturePlayer(frames, (frame) => session.handleFrame(frame));
    pauseBtn.onclick = () => player.pause();
    resumeBtn.onclick = () => player.resume();
    speedInput.onchange = () => player.setSpeed(Number(speedInput.value));
    banner.textContent = "fixture mode";
    player.start();
    return;
  }

  await api.register(config.userId, config.secret);
  const token = await api.login(config.userId, config.secret);
  const stream = new StreamClient(config.serviceUrl, token, {
    onFrame: (frame) => session.handleFrame(frame),
    onStatus: (status) => {
      banner.textContent = status === "open" ? "" : `stream: ${status}`;
      banner.classList.toggle("visible", status !== "open");
    },
  });
  const refreshControls = async () => {
    const active = await api.replayActive().catch(() => false);
    pauseBtn.disabled = !active;
    resumeBtn.disabled = !active;
    speedInput.disabled = !active;
  };
  pauseBtn.onclick = () => void session.controlReplay("pause");
  resumeBtn.onclick = () => void session.controlReplay("resume");
  speedInput.onchange = () => void session.controlReplay("speed", Number(speedInput.value));
  setInterval(() => void refreshControls(), 2000);
  await refreshControls();
  stream.start();
}

void boot();
