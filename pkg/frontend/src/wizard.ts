// Calibration wizard: guides the 24 centre-out movements (three rounds
// of eight directions), records labelled samples, repeats rejected
// movements and assembles the dataset for upload. Aborting discards
// everything; the installed map only changes after the server accepts
// the full recording.

import type { CalibrationSample } from "./types";

export const DIRECTIONS = ["F", "B", "L", "R", "TU", "TD", "LT", "RT"] as const;
export type Direction = (typeof DIRECTIONS)[number];

export const DIRECTION_HINTS: Record<Direction, string> = {
  F: "push forward",
  B: "pull backward",
  L: "push left",
  R: "push right",
  TU: "toe up",
  TD: "toe down",
  LT: "twist left",
  RT: "twist right",
};

export const ROUNDS = 3;

export type WizardPhase = "prompt" | "recording" | "review" | "done" | "aborted";

export interface WizardState {
  phase: WizardPhase;
  round: number; // 0-based
  step: number; // 0-based index into DIRECTIONS
  completed: number; // accepted movements so far
}

export class CalibrationWizard {
  state: WizardState = { phase: "prompt", round: 0, step: 0, completed: 0 };
  private samples: CalibrationSample[] = [];
  private current: CalibrationSample[] = [];

  get totalMovements(): number {
    return ROUNDS * DIRECTIONS.length;
  }

  get currentDirection(): Direction {
    return DIRECTIONS[this.state.step];
  }

  prompt(): string {
    const n = this.state.completed + 1;
    const dir = this.currentDirection;
    return `movement ${n}/${this.totalMovements}: ${DIRECTION_HINTS[dir]} (${dir}), hold ~1 s, return`;
  }

  startRecording(): void {
    if (this.state.phase !== "prompt") throw new Error(`cannot record in ${this.state.phase}`);
    this.current = [];
    this.state.phase = "recording";
  }

  addSample(t: number, f: number[]): void {
    if (this.state.phase !== "recording") return;
    this.current.push({ t, label: this.currentDirection, f });
  }

  stopRecording(): void {
    if (this.state.phase !== "recording") throw new Error("not recording");
    this.state.phase = "review";
  }

  // Local plateau screen so obviously short holds repeat immediately
  // without a server round trip: magnitude above 60% of the segment
  // peak must persist for at least 0.8 s.
  segmentLooksHeld(): boolean {
    const mags = this.current.map((s) => Math.hypot(...s.f));
    const peak = Math.max(0, ...mags);
    if (peak <= 0 || this.current.length < 2) return false;
    const level = 0.6 * peak;
    let best = 0;
    let runStart: number | null = null;
    for (let i = 0; i < this.current.length; i++) {
      if (mags[i] >= level) {
        runStart = runStart ?? this.current[i].t;
        best = Math.max(best, this.current[i].t - runStart);
      } else {
        runStart = null;
      }
    }
    return best >= 0.8;
  }

  accept(): void {
    if (this.state.phase !== "review") throw new Error("nothing to accept");
    if (this.samples.length > 0 && this.current.length > 0) {
      // Rest gap so consecutive movements never merge into one segment.
      const last = this.samples[this.samples.length - 1];
      this.samples.push({ t: last.t + 0.02, label: null, f: new Array(8).fill(0) });
    }
    this.samples.push(...this.current);
    this.current = [];
    this.state.completed += 1;
    if (this.state.completed >= this.totalMovements) {
      this.state.phase = "done";
      return;
    }
    this.state.step = (this.state.step + 1) % DIRECTIONS.length;
    if (this.state.step === 0) this.state.round += 1;
    this.state.phase = "prompt";
  }

  reject(): void {
    if (this.state.phase !== "review") throw new Error("nothing to reject");
    this.current = [];
    this.state.phase = "prompt"; // same direction again
  }

  abort(): void {
    this.samples = [];
    this.current = [];
    this.state.phase = "aborted";
  }

  dataset(): { samples: CalibrationSample[] } {
    if (this.state.phase !== "done") throw new Error("wizard not finished");
    return { samples: this.samples };
  }
}
