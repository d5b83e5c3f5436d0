// Full round trip against the real feedback service: a 2-step HUMAN-mode
// session is hosted by the Python server; this test drives it through the
// UI's own ApiClient + AppStore layers.  Covers: acks for every judgment,
// training triggered by the third judgment of a step, dashboard re-render
// on step_completed, and exactly-once recording of duplicate submissions.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import WebSocket from "ws";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type SocketLike } from "../src/api.js";
import { AppStore } from "../src/store.js";
import type { SessionEvent } from "../src/types.js";

const PORT = 8000 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = join(__dirname, "..", "..");

let server: ChildProcess;
let workdir: string;

function makeDatasetAndConfig(): string {
  workdir = mkdtempSync(join(tmpdir(), "prefscan-it-"));
  const script = `
import json
from prefscan.dataset import save_dataset
from prefscan.synthetic import make_stripe_dataset
save_dataset(make_stripe_dataset(12, 12, smooth=True), r"${workdir}/ds")
cfg = {"dataset_path": r"${workdir}/ds", "judge_type": "human",
       "n_initial_random": 4, "n_steps": 2, "epochs": 15,
       "window": 5, "seed": 3}
with open(r"${workdir}/cfg.json", "w") as fh:
    json.dump(cfg, fh)
print("ok")
`;
  const res = spawnSync("python3", ["-c", script], {
    cwd: REPO_ROOT,
    encoding: "utf-8",
  });
  if (!res.stdout.includes("ok")) {
    throw new Error(`dataset setup failed: ${res.stderr}`);
  }
  return join(workdir, "cfg.json");
}

async function waitForServer(timeoutMs = 30_000): Promise<void> {
  const t0 = Date.now();
  while (Date.now() - t0 < timeoutMs) {
    try {
      const res = await fetch(`${BASE}/api/sessions`);
      if (res.ok) return;
    } catch {
      /* not up yet */
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error("server never came up");
}

async function waitFor(
  predicate: () => boolean | Promise<boolean>,
  what: string,
  timeoutMs = 60_000,
): Promise<void> {
  const t0 = Date.now();
  while (Date.now() - t0 < timeoutMs) {
    if (await predicate()) return;
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error(`timed out waiting for ${what}`);
}

beforeAll(async () => {
  const cfgPath = makeDatasetAndConfig();
  server = spawn(
    "python3",
    ["-m", "prefscan.cli", "serve", "--config", cfgPath, "--port", String(PORT)],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stderr?.on("data", () => {});
  await waitForServer();
}, 60_000);

afterAll(() => {
  server?.kill("SIGKILL");
});

describe("live session round trip", () => {
  it("drives a 2-step HUMAN session end to end", async () => {
    const api = new ApiClient(BASE, "default");
    const store = new AppStore(api);

    const events: SessionEvent[] = [];
    const socket = api.connectEvents(
      (url) => new WebSocket(url) as unknown as SocketLike,
      (e) => {
        events.push(e);
        void store.onEvent(e);
      },
      () => {},
    );

    // initial batch: 4 random points pair into 3 comparison requests
    await waitFor(async () => {
      await store.refresh();
      return store.state.queue.length === 3;
    }, "3 initial pending comparisons");

    // duplicate submission of the first comparison: exactly one record
    const first = store.current!;
    const ack1 = await api.submitJudgment(first.comparison_id, "A", "STRONG");
    expect(ack1.accepted).toBe(true);
    expect(ack1.replayed).toBe(false);
    const ack2 = await api.submitJudgment(first.comparison_id, "B", "WEAK");
    expect(ack2.replayed).toBe(true);
    expect(ack2.remaining).toBe(ack1.remaining);
    await store.refresh();
    expect(store.state.queue).toHaveLength(2);

    // remaining judgments of the initial batch; the last one triggers training
    while (store.current) {
      const ack = await api.submitJudgment(
        store.current.comparison_id,
        "A",
        "MODERATE",
      );
      expect(ack.accepted).toBe(true);
      await store.refresh();
    }
    await waitFor(
      () => events.some((e) => e.type === "map_updated"),
      "initial training map update",
    );

    // two active-learning steps, judged through the store itself
    for (const step of [1, 2]) {
      await waitFor(async () => {
        await store.refresh();
        return store.state.queue.length > 0;
      }, `step ${step} pending batch`);
      expect(store.state.queue.length).toBe(3);
      const rendersBefore = store.state.renders;
      while (store.current) {
        await store.submitCurrent("A", "STRONG");
      }
      expect(store.state.phase).toBe("training");
      await waitFor(
        () =>
          events.some(
            (e) => e.type === "step_completed" && e.data["step"] === step,
          ),
        `step ${step} completion event`,
      );
      await waitFor(async () => {
        await store.refresh();
        return store.state.snapshot?.step === step;
      }, `state to reach step ${step}`);
      // the dashboard re-rendered on the step_completed event
      expect(store.state.renders).toBeGreaterThan(rendersBefore);
    }

    await waitFor(async () => {
      await store.refresh();
      return store.state.snapshot?.finished === true;
    }, "session to finish");

    const snap = store.state.snapshot!;
    expect(snap.step).toBe(2);
    expect(snap.error).toBeNull();
    expect(snap.measured).toHaveLength(4 + 2 * 2);
    expect(snap.utility_mean).toHaveLength(12);
    expect(snap.utility_mean![0]).toHaveLength(12);
    expect(store.state.phase).toBe("done");

    // event stream invariants: strictly increasing sequence numbers
    const seqs = events.map((e) => e.seq);
    expect([...seqs].sort((a, b) => a - b)).toEqual(seqs);
    expect(new Set(seqs).size).toBe(seqs.length);
    socket.close();
  }, 120_000);
});
