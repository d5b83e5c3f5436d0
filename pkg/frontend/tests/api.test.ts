import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, type FetchLike } from "../src/api.js";

function jsonResponse(body: unknown, status = 200) {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
  };
}

describe("submitJudgment", () => {
  it("serializes the judgment body exactly", async () => {
    const calls: Array<{ url: string; init?: { body?: string } }> = [];
    const fetchImpl: FetchLike = async (url, init) => {
      calls.push({ url, init });
      return jsonResponse({
        accepted: true,
        comparison_id: 5,
        remaining: 2,
        replayed: false,
      });
    };
    const api = new ApiClient("http://x", "default", fetchImpl);
    const ack = await api.submitJudgment(5, "TIE", "STRONG");
    expect(ack.remaining).toBe(2);
    expect(calls[0].url).toBe("http://x/api/session/default/judgment");
    expect(JSON.parse(calls[0].init!.body!)).toEqual({
      comparison_id: 5,
      outcome: "TIE",
      confidence: "STRONG",
    });
  });

  it("retries network failures with the same comparison id", async () => {
    const bodies: string[] = [];
    let attempts = 0;
    const fetchImpl: FetchLike = async (_url, init) => {
      attempts += 1;
      if (attempts < 3) throw new Error("connection reset");
      bodies.push(init!.body!);
      return jsonResponse({
        accepted: true,
        comparison_id: 9,
        remaining: 0,
        replayed: true,
      });
    };
    const api = new ApiClient("http://x", "default", fetchImpl, 3, 1);
    const ack = await api.submitJudgment(9, "A", "WEAK");
    expect(attempts).toBe(3);
    expect(ack.replayed).toBe(true);
    expect(JSON.parse(bodies[0]).comparison_id).toBe(9);
  });

  it("does not retry a 4xx rejection", async () => {
    let attempts = 0;
    const fetchImpl: FetchLike = async () => {
      attempts += 1;
      return jsonResponse({ detail: "tie_support_enabled is false" }, 422);
    };
    const api = new ApiClient("http://x", "default", fetchImpl, 3, 1);
    await expect(api.submitJudgment(1, "TIE", "STRONG")).rejects.toThrow(
      ApiError,
    );
    expect(attempts).toBe(1);
  });
});

describe("getPending / getState", () => {
  it("unwraps the pending list", async () => {
    const fetchImpl: FetchLike = async (url) => {
      expect(url).toContain("/pending");
      return jsonResponse({ pending: [{ comparison_id: 1 }] });
    };
    const api = new ApiClient("http://x", "default", fetchImpl);
    const pending = await api.getPending();
    expect(pending).toHaveLength(1);
  });

  it("propagates 404 as ApiError", async () => {
    const fetchImpl: FetchLike = async () => jsonResponse({}, 404);
    const api = new ApiClient("http://x", "nope", fetchImpl);
    await expect(api.getState()).rejects.toThrow(ApiError);
  });

  it("passes the downsample parameter", async () => {
    const urls: string[] = [];
    const fetchImpl: FetchLike = async (url) => {
      urls.push(url);
      return jsonResponse({});
    };
    const api = new ApiClient("http://x", "default", fetchImpl);
    await api.getState(4);
    expect(urls[0]).toContain("downsample=4");
  });
});

describe("connectEvents", () => {
  it("parses messages and converts the scheme to ws", () => {
    const sockets: Array<{ url: string; socket: any }> = [];
    const factory = (url: string) => {
      const socket = {
        onmessage: null as any,
        onclose: null as any,
        onerror: null as any,
        close: vi.fn(),
      };
      sockets.push({ url, socket });
      return socket;
    };
    const api = new ApiClient("http://host:9", "default");
    const events: number[] = [];
    api.connectEvents(factory, (e) => events.push(e.seq), () => {}, 3);
    expect(sockets[0].url).toBe(
      "ws://host:9/api/session/default/events?since=3",
    );
    sockets[0].socket.onmessage({
      data: JSON.stringify({ seq: 4, type: "map_updated", data: {} }),
    });
    expect(events).toEqual([4]);
  });
});
