// Shared message and state types mirroring the server's JSON wire format.

export type InterfaceMode = "pedal" | "button";

export interface PedalFrame {
  kind: "force";
  t: number;
  f: number[]; // 8 channels, rest = 0, full push ~ +/-1
}

export interface ButtonFrameMsg {
  kind: "button";
  t: number;
  b: boolean[]; // 8 switches
}

export type InputFrame = PedalFrame | ButtonFrameMsg;

export interface TrialMetrics {
  trial_id: string;
  error_rate: number;
  completion_time: number;
  sal_trans: number;
  sal_rot: number | null;
}

export interface TrialCompleteEvent {
  type: "trial_complete";
  trial: number;
  trial_id: string;
  direction: string;
  metrics: TrialMetrics | null;
  log_path: string | null;
}

export interface StateMsg {
  type: "state";
  seq: number;
  t: number;
  pose: [number, number, number, number];
  filtered: number[];
  raw: number[];
  touch: boolean;
  zone: "start" | "free" | "end";
  phase: "idle" | "armed" | "running" | "done" | "finished";
  trial: number;
  finished: boolean;
  event?: TrialCompleteEvent;
}

export interface ReadyMsg {
  type: "ready";
  session_id: string;
  path: string;
  interface: string;
  mode: string;
}

export interface SessionSummaryMsg {
  type: "session_summary";
  session_id: string;
  trials: Array<{
    trial: number;
    trial_id: string;
    direction: string;
    completed: boolean;
    metrics: TrialMetrics | null;
  }>;
}

export interface ErrorMsg {
  type: "error";
  detail: string;
}

export type ServerMsg = StateMsg | ReadyMsg | SessionSummaryMsg | ErrorMsg;

export interface PathDetail {
  id: string;
  name: string;
  length_mm: number;
  z_extent_mm: number;
  wire_radius_mm: number;
  ring_inner_radius_mm: number;
  start: number[];
  end: number[];
  polyline: number[][];
}

export interface CalibrationSample {
  t: number;
  label: string | null;
  f: number[];
}

export interface SolvedMap {
  w: number[][];
  dead_zone: number[];
  gain: number[];
  checksum: string;
}
