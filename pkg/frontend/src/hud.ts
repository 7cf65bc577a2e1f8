// Trial HUD model: phase, running timer, buzzer, completed-trial rows.
// Pure functions so the formatting is unit-testable; main.ts binds the
// result to DOM nodes each frame.

import type { StateMsg, TrialCompleteEvent, TrialMetrics } from "./types";

export interface HudModel {
  phaseLabel: string;
  timer: string;
  buzzer: boolean;
  trialNo: number;
  zone: string;
  showInputMeter: boolean;
}

export function formatSeconds(s: number): string {
  if (!isFinite(s) || s < 0) return "0.0 s";
  return `${s.toFixed(1)} s`;
}

const PHASE_LABELS: Record<string, string> = {
  armed: "armed: leave the start plate to begin",
  running: "running",
  done: "trial complete",
  finished: "session finished",
  idle: "idle",
};

export function hudFromState(state: StateMsg, runningSince: number | null): HudModel {
  const elapsed = state.phase === "running" && runningSince !== null
    ? state.t - runningSince
    : 0;
  return {
    phaseLabel: PHASE_LABELS[state.phase] ?? state.phase,
    timer: formatSeconds(elapsed),
    buzzer: state.touch,
    trialNo: state.trial,
    zone: state.zone,
    // The operator steers by watching the tool, not the pedal: input
    // meters stay hidden while a trial is running.
    showInputMeter: state.phase !== "running",
  };
}

export function trialRow(ev: TrialCompleteEvent): string {
  const m = ev.metrics;
  if (!m) return `trial ${ev.trial} (${ev.direction}): no metrics`;
  const rot = m.sal_rot === null ? "-" : Math.abs(m.sal_rot).toFixed(2);
  return (
    `trial ${ev.trial} (${ev.direction}): ${m.completion_time.toFixed(1)} s, ` +
    `error ${m.error_rate.toFixed(1)}%, |sal| ${Math.abs(m.sal_trans).toFixed(2)}/${rot}`
  );
}

export function summaryLine(trials: Array<{ completed: boolean; metrics: TrialMetrics | null }>): string {
  const done = trials.filter((t) => t.completed && t.metrics);
  if (done.length === 0) return "no completed trials";
  const mean = (xs: number[]) => xs.reduce((a, b) => a + b, 0) / xs.length;
  const times = done.map((t) => t.metrics!.completion_time);
  const errs = done.map((t) => t.metrics!.error_rate);
  return (
    `${done.length} trials: mean time ${mean(times).toFixed(1)} s, ` +
    `mean error ${mean(errs).toFixed(1)}%`
  );
}
