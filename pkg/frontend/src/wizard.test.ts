import { describe, expect, it } from "vitest";

import { CalibrationWizard, DIRECTIONS, ROUNDS } from "./wizard";

function recordHeldMovement(wizard: CalibrationWizard, amplitude = 1.0): void {
  wizard.startRecording();
  const dir = wizard.currentDirection;
  const t0 = wizard.state.completed * 3.0;
  // ramp up, hold 1 s above 60% of peak, ramp down, at 50 Hz
  for (let k = 0; k < 100; k++) {
    const t = t0 + k / 50;
    const phase = k < 20 ? k / 20 : k < 70 ? 1 : (100 - k) / 30;
    const f = new Array(8).fill(0);
    f[DIRECTIONS.indexOf(dir)] = amplitude * phase;
    wizard.addSample(t, f);
  }
  wizard.stopRecording();
}

describe("calibration wizard", () => {
  it("prompts 24 movements in three rounds of eight", () => {
    const wizard = new CalibrationWizard();
    const seen: string[] = [];
    while (wizard.state.phase !== "done") {
      seen.push(wizard.currentDirection);
      recordHeldMovement(wizard);
      expect(wizard.segmentLooksHeld()).toBe(true);
      wizard.accept();
    }
    expect(seen).toHaveLength(ROUNDS * DIRECTIONS.length);
    expect(seen.slice(0, 8)).toEqual([...DIRECTIONS]);
    expect(seen.slice(8, 16)).toEqual([...DIRECTIONS]);
  });

  it("a short hold is screened and the movement repeats", () => {
    const wizard = new CalibrationWizard();
    wizard.startRecording();
    for (let k = 0; k < 10; k++) {
      const f = new Array(8).fill(0);
      f[0] = k < 5 ? 1 : 0; // 0.1 s blip
      wizard.addSample(k / 50, f);
    }
    wizard.stopRecording();
    expect(wizard.segmentLooksHeld()).toBe(false);
    wizard.reject();
    expect(wizard.state.phase).toBe("prompt");
    expect(wizard.currentDirection).toBe("F");
    expect(wizard.state.completed).toBe(0);
  });

  it("abort discards everything", () => {
    const wizard = new CalibrationWizard();
    recordHeldMovement(wizard);
    wizard.accept();
    wizard.abort();
    expect(wizard.state.phase).toBe("aborted");
    expect(() => wizard.dataset()).toThrow();
  });

  it("finished dataset has labelled samples with rest gaps", () => {
    const wizard = new CalibrationWizard();
    while (wizard.state.phase !== "done") {
      recordHeldMovement(wizard);
      wizard.accept();
    }
    const { samples } = wizard.dataset();
    const labelled = samples.filter((s) => s.label !== null);
    const rests = samples.filter((s) => s.label === null);
    expect(labelled.length).toBe(24 * 100);
    expect(rests.length).toBe(23); // one separator between consecutive movements
    const labels = new Set(labelled.map((s) => s.label));
    expect(labels.size).toBe(8);
    // timestamps non-decreasing
    for (let i = 1; i < samples.length; i++) {
      expect(samples[i].t).toBeGreaterThanOrEqual(samples[i - 1].t);
    }
  });

  it("cannot accept or record out of phase", () => {
    const wizard = new CalibrationWizard();
    expect(() => wizard.accept()).toThrow();
    wizard.startRecording();
    expect(() => wizard.startRecording()).toThrow();
  });
});
