/** Thin client over the sync service's REST endpoints. */

import type { FeedbackRecord, ReplayCommand } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private token: string | null = null,
    private fetchFn: typeof fetch = fetch,
  ) {}

  setToken(token: string): void {
    this.token = token;
  }

  private headers(): Record<string, string> {
    const h: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      const text = await resp.text();
      throw new ApiError(`${method} ${path} -> ${resp.status}: ${text}`, resp.status);
    }
    return resp.json();
  }

  async register(userId: string, secret: string): Promise<void> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/v1/auth/register`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ userId, secret }),
    });
    if (!resp.ok && resp.status !== 409) {
      throw new ApiError(`register -> ${resp.status}`, resp.status);
    }
  }

  async login(userId: string, secret: string): Promise<string> {
    const data = (await this.request("POST", "/api/v1/auth/login", { userId, secret })) as {
      token: string;
    };
    this.token = data.token;
    return data.token;
  }

  async postFeedback(messageId: string, emoji: string): Promise<FeedbackRecord> {
    return (await this.request("POST", "/api/v1/feedback", { messageId, emoji })) as FeedbackRecord;
  }

  async queryFeedback(): Promise<FeedbackRecord[]> {
    const page = (await this.request("GET", "/api/v1/records/feedback")) as {
      records: { data: FeedbackRecord }[];
    };
    return page.records.map((r) => r.data);
  }

  async replayControl(command: ReplayCommand, value?: number): Promise<void> {
    await this.request("POST", "/api/v1/replay/control", { command, value: value ?? null });
  }

  async replayActive(): Promise<boolean> {
    const status = (await this.request("GET", "/api/v1/replay/status")) as { active: boolean };
    return status.active;
  }
}
