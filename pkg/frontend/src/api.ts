// HTTP + WebSocket client for the feedback service.
//
// Judgment submission is duplicate-safe by construction: retries reuse the
// same comparison id, and the server's idempotent replay ack is surfaced to
// the caller rather than recorded twice.

import type {
  ConfidenceLevel,
  JudgmentAck,
  Outcome,
  PendingComparison,
  SessionEvent,
  StateSnapshot,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export interface SocketLike {
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: ((err?: unknown) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private sessionId: string,
    private fetchImpl: FetchLike = fetch as unknown as FetchLike,
    private maxRetries = 3,
    private retryDelayMs = 250,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}/api/session/${this.sessionId}${path}`;
  }

  private async getJson<T>(url: string): Promise<T> {
    const res = await this.fetchImpl(url);
    if (!res.ok) throw new ApiError(res.status, `GET ${url} -> ${res.status}`);
    return (await res.json()) as T;
  }

  async getPending(): Promise<PendingComparison[]> {
    const body = await this.getJson<{ pending: PendingComparison[] }>(
      this.url("/pending"),
    );
    return body.pending;
  }

  async getState(downsample = 1): Promise<StateSnapshot> {
    return this.getJson<StateSnapshot>(
      this.url(`/state?downsample=${downsample}`),
    );
  }

  /** POST one judgment; network failures retry with the SAME comparison id,
   * so a judgment can never be recorded twice. */
  async submitJudgment(
    comparisonId: number,
    outcome: Outcome,
    confidence: ConfidenceLevel,
  ): Promise<JudgmentAck> {
    const payload = JSON.stringify({
      comparison_id: comparisonId,
      outcome,
      confidence,
    });
    let lastErr: unknown = null;
    for (let attempt = 0; attempt <= this.maxRetries; attempt++) {
      try {
        const res = await this.fetchImpl(this.url("/judgment"), {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: payload,
        });
        if (res.ok) return (await res.json()) as JudgmentAck;
        // 4xx is a real rejection, not a transient failure
        const detail = await res.json().catch(() => ({}));
        throw new ApiError(
          res.status,
          `judgment rejected: ${JSON.stringify(detail)}`,
        );
      } catch (err) {
        if (err instanceof ApiError) throw err;
        lastErr = err;
        await sleep(this.retryDelayMs * (attempt + 1));
      }
    }
    throw new Error(`judgment submission failed after retries: ${lastErr}`);
  }

  /** Subscribe to the event stream.  Events below `since` are dropped by the
   * server; duplicates are the caller's concern (see AppStore.ingestEvent). */
  connectEvents(
    factory: SocketFactory,
    onEvent: (e: SessionEvent) => void,
    onDisconnect: () => void,
    since = 0,
  ): SocketLike {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const socket = factory(
      `${wsBase}/api/session/${this.sessionId}/events?since=${since}`,
    );
    socket.onmessage = (ev) => {
      const text =
        typeof ev.data === "string" ? ev.data : String(ev.data ?? "");
      onEvent(JSON.parse(text) as SessionEvent);
    };
    socket.onclose = onDisconnect;
    socket.onerror = () => socket.close();
    return socket;
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
