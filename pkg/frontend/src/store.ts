// Client-side session state: the pending queue, submission lifecycle, and
// the dashboard snapshot.  Pure TypeScript with no DOM access so the whole
// state machine is unit-testable; rendering subscribes to change events.
//
// Judgments are never fabricated here: the only path to a submission is
// submitCurrent(), which the UI calls from an explicit user action.

import type { ApiClient } from "./api.js";
import type {
  ConfidenceLevel,
  Outcome,
  PendingComparison,
  SessionEvent,
  StateSnapshot,
} from "./types.js";

export type Phase = "idle" | "judging" | "submitting" | "training" | "done";

export interface StoreState {
  phase: Phase;
  queue: PendingComparison[]; // oldest first; [0] is displayed
  snapshot: StateSnapshot | null;
  lastAckReplayed: boolean;
  lastEventSeq: number;
  renders: number;
  blindMode: boolean; // hide maps while judging
  statusLine: string;
}

export class AppStore {
  state: StoreState = {
    phase: "idle",
    queue: [],
    snapshot: null,
    lastAckReplayed: false,
    lastEventSeq: 0,
    renders: 0,
    blindMode: false,
    statusLine: "connecting...",
  };

  private listeners: Array<(s: StoreState) => void> = [];

  constructor(private api: ApiClient) {}

  subscribe(fn: (s: StoreState) => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    this.state.renders += 1;
    for (const fn of this.listeners) fn(this.state);
  }

  get current(): PendingComparison | null {
    return this.state.queue[0] ?? null;
  }

  get tieAllowed(): boolean {
    return this.state.snapshot?.tie_support_enabled ?? true;
  }

  setBlindMode(on: boolean): void {
    this.state.blindMode = on;
    this.notify();
  }

  /** Full resync: authoritative state + pending list (reconnect contract). */
  async refresh(): Promise<void> {
    const [snapshot, pending] = await Promise.all([
      this.api.getState(),
      this.api.getPending(),
    ]);
    this.state.snapshot = snapshot;
    this.state.queue = [...pending].sort(
      (a, b) => a.comparison_id - b.comparison_id,
    );
    if (snapshot.finished) {
      this.state.phase = "done";
      this.state.statusLine = `experiment finished after step ${snapshot.step}`;
    } else if (this.state.queue.length > 0) {
      this.state.phase = "judging";
      this.state.statusLine = `${this.state.queue.length} comparison(s) waiting`;
    } else if (snapshot.initialized) {
      this.state.phase = "training";
      this.state.statusLine = `training after step ${snapshot.step}...`;
    } else {
      this.state.phase = "idle";
      this.state.statusLine = "session starting...";
    }
    this.notify();
  }

  /** Events arrive at-least-once; sequence numbers deduplicate. Returns
   * whether the event was fresh. */
  ingestEvent(event: SessionEvent): boolean {
    if (event.seq <= this.state.lastEventSeq) return false;
    this.state.lastEventSeq = event.seq;
    return true;
  }

  async onEvent(event: SessionEvent): Promise<void> {
    if (!this.ingestEvent(event)) return;
    // every fresh event type changes what the dashboard should show
    await this.refresh();
  }

  async submitCurrent(
    outcome: Outcome,
    confidence: ConfidenceLevel,
  ): Promise<void> {
    const item = this.current;
    if (!item || this.state.phase === "submitting") return;
    if (outcome === "TIE" && !this.tieAllowed) {
      this.state.statusLine = "ties are disabled for this session";
      this.notify();
      return;
    }
    this.state.phase = "submitting";
    this.notify();
    const ack = await this.api.submitJudgment(
      item.comparison_id,
      outcome,
      confidence,
    );
    this.state.lastAckReplayed = ack.replayed;
    this.state.queue = this.state.queue.filter(
      (p) => p.comparison_id !== item.comparison_id,
    );
    const note = ack.replayed
      ? "duplicate submission; original judgment stands"
      : `recorded; ${ack.remaining} remaining`;
    if (this.state.queue.length > 0) {
      this.state.phase = "judging";
      this.state.statusLine = note;
    } else {
      this.state.phase = "training";
      this.state.statusLine = `${note}; training...`;
    }
    this.notify();
  }
}
