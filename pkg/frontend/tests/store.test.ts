import { beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiClient } from "../src/api.js";
import { AppStore } from "../src/store.js";
import type {
  PendingComparison,
  SessionEvent,
  StateSnapshot,
} from "../src/types.js";

function view(id: number) {
  return {
    candidate_id: id,
    row: 0,
    col: id,
    patch_png: "",
    patch: [[0]],
    payload_kind: "spectral" as const,
    payload: { voltage: [0, 1, 0, -1], response: [0, 1, 0, -1] },
  };
}

function pendingItem(cid: number): PendingComparison {
  return { comparison_id: cid, a: view(1), b: view(2), issued_at: 0 };
}

function snapshot(overrides: Partial<StateSnapshot> = {}): StateSnapshot {
  return {
    session: "default",
    step: 0,
    finished: false,
    initialized: true,
    height: 4,
    width: 4,
    payload_kind: "spectral",
    tie_support_enabled: true,
    n_steps: 2,
    beta: 5,
    current_best: null,
    measured: [],
    error: null,
    utility_mean: [[0]],
    utility_variance: [[0]],
    ...overrides,
  };
}

interface FakeApi {
  state: StateSnapshot;
  pending: PendingComparison[];
  acks: Array<{ cid: number; outcome: string; confidence: string }>;
  replayNext: boolean;
}

function makeApi(): { api: ApiClient; fake: FakeApi } {
  const fake: FakeApi = {
    state: snapshot(),
    pending: [],
    acks: [],
    replayNext: false,
  };
  const api = {
    getState: vi.fn(async () => fake.state),
    getPending: vi.fn(async () => fake.pending),
    submitJudgment: vi.fn(async (cid: number, outcome: string, confidence: string) => {
      fake.acks.push({ cid, outcome, confidence });
      const replayed = fake.replayNext;
      fake.replayNext = false;
      fake.pending = fake.pending.filter((p) => p.comparison_id !== cid);
      return {
        accepted: true,
        comparison_id: cid,
        remaining: fake.pending.length,
        replayed,
      };
    }),
  } as unknown as ApiClient;
  return { api, fake };
}

describe("AppStore", () => {
  let api: ApiClient;
  let fake: FakeApi;
  let store: AppStore;

  beforeEach(() => {
    ({ api, fake } = makeApi());
    store = new AppStore(api);
  });

  it("shows the oldest pending comparison first", async () => {
    fake.pending = [pendingItem(7), pendingItem(5), pendingItem(6)];
    await store.refresh();
    expect(store.current?.comparison_id).toBe(5);
    expect(store.state.phase).toBe("judging");
    expect(store.state.queue.map((p) => p.comparison_id)).toEqual([5, 6, 7]);
  });

  it("submitting advances the queue and enters training on the last one", async () => {
    fake.pending = [pendingItem(1), pendingItem(2)];
    await store.refresh();
    await store.submitCurrent("A", "STRONG");
    expect(fake.acks).toEqual([{ cid: 1, outcome: "A", confidence: "STRONG" }]);
    expect(store.current?.comparison_id).toBe(2);
    expect(store.state.phase).toBe("judging");
    await store.submitCurrent("B", "WEAK");
    expect(store.state.phase).toBe("training");
    expect(store.state.queue).toHaveLength(0);
  });

  it("every submission comes from an explicit action: no auto-submit", async () => {
    fake.pending = [pendingItem(1)];
    await store.refresh();
    await store.onEvent({ seq: 1, type: "new_pending", data: {} });
    await store.onEvent({ seq: 2, type: "map_updated", data: {} });
    expect(fake.acks).toHaveLength(0);
  });

  it("blocks TIE when the server config disables ties", async () => {
    fake.state = snapshot({ tie_support_enabled: false });
    fake.pending = [pendingItem(1)];
    await store.refresh();
    expect(store.tieAllowed).toBe(false);
    await store.submitCurrent("TIE", "STRONG");
    expect(fake.acks).toHaveLength(0);
    expect(store.state.statusLine).toContain("disabled");
  });

  it("surfaces the idempotent-replay flag", async () => {
    fake.pending = [pendingItem(3)];
    fake.replayNext = true;
    await store.refresh();
    await store.submitCurrent("A", "MODERATE");
    expect(store.state.lastAckReplayed).toBe(true);
    expect(store.state.statusLine).toContain("original judgment stands");
  });

  it("deduplicates events by sequence number", () => {
    const e1: SessionEvent = { seq: 1, type: "new_pending", data: {} };
    const e2: SessionEvent = { seq: 2, type: "step_completed", data: {} };
    expect(store.ingestEvent(e1)).toBe(true);
    expect(store.ingestEvent(e1)).toBe(false);
    expect(store.ingestEvent(e2)).toBe(true);
    expect(store.ingestEvent(e1)).toBe(false);
    expect(store.state.lastEventSeq).toBe(2);
  });

  it("re-renders on step_completed", async () => {
    fake.pending = [];
    await store.refresh();
    const before = store.state.renders;
    fake.state = snapshot({ step: 1 });
    await store.onEvent({ seq: 1, type: "step_completed", data: { step: 1 } });
    expect(store.state.renders).toBeGreaterThan(before);
    expect(store.state.snapshot?.step).toBe(1);
  });

  it("duplicate step_completed does not re-render twice", async () => {
    await store.refresh();
    await store.onEvent({ seq: 1, type: "step_completed", data: {} });
    const after = store.state.renders;
    await store.onEvent({ seq: 1, type: "step_completed", data: {} });
    expect(store.state.renders).toBe(after);
  });

  it("finished sessions report done", async () => {
    fake.state = snapshot({ finished: true, step: 2 });
    await store.refresh();
    expect(store.state.phase).toBe("done");
    expect(store.state.statusLine).toContain("finished");
  });

  it("blind mode is a pure view flag", async () => {
    await store.refresh();
    const before = store.state.renders;
    store.setBlindMode(true);
    expect(store.state.blindMode).toBe(true);
    expect(store.state.renders).toBe(before + 1);
  });
});
