// Wire types for the feedback service API.

export type Outcome = "A" | "B" | "TIE";
export type ConfidenceLevel = "WEAK" | "MODERATE" | "STRONG";

export interface SpectralPayload {
  voltage: number[];
  response: number[];
}

export interface VectorPayload {
  origin: [number, number];
  vectors: number[][][]; // rows x cols x 3
}

export interface CandidateView {
  candidate_id: number;
  row: number;
  col: number;
  patch_png: string; // base64 PNG
  patch: number[][];
  payload_kind: "spectral" | "vector3";
  payload: SpectralPayload | VectorPayload;
}

export interface PendingComparison {
  comparison_id: number;
  a: CandidateView;
  b: CandidateView;
  issued_at: number;
}

export interface JudgmentAck {
  accepted: boolean;
  comparison_id: number;
  remaining: number;
  replayed: boolean;
}

export interface MeasuredPoint {
  id: number;
  row: number;
  col: number;
}

export interface StateSnapshot {
  session: string;
  step: number;
  finished: boolean;
  initialized: boolean;
  height: number;
  width: number;
  payload_kind: "spectral" | "vector3";
  tie_support_enabled: boolean;
  n_steps: number;
  beta: number | null;
  current_best: number | null;
  measured: MeasuredPoint[];
  error: string | null;
  utility_mean?: number[][];
  utility_variance?: number[][];
}

export type EventType = "new_pending" | "step_completed" | "map_updated";

export interface SessionEvent {
  seq: number;
  type: EventType;
  data: Record<string, unknown>;
}
