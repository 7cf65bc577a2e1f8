import { describe, expect, it } from "vitest";

import {
  bindingComplete,
  buttonFrame,
  channelValue,
  defaultButtonBinding,
  defaultPedalBinding,
  pedalFrame,
} from "./input";

describe("binding completeness", () => {
  it("default bindings are complete", () => {
    expect(bindingComplete(defaultPedalBinding())).toBe(true);
    expect(bindingComplete(defaultButtonBinding())).toBe(true);
  });

  it("an unbound channel blocks arming", () => {
    const binding = defaultPedalBinding();
    binding.channels[3] = null;
    expect(bindingComplete(binding)).toBe(false);
  });

  it("an unbound key blocks arming", () => {
    const binding = defaultButtonBinding();
    binding.keys[7] = null;
    expect(bindingComplete(binding)).toBe(false);
  });
});

describe("pedal channel mapping", () => {
  it("half-axis: each channel only reports pushes in its own direction", () => {
    expect(channelValue([0.5], { axis: 0, scale: +1 })).toBe(0.5);
    expect(channelValue([0.5], { axis: 0, scale: -1 })).toBe(0);
    expect(channelValue([-0.5], { axis: 0, scale: -1 })).toBe(0.5);
  });

  it("clamps to 1", () => {
    expect(channelValue([1.8], { axis: 0, scale: +1 })).toBe(1);
  });

  it("missing axes read 0", () => {
    expect(channelValue([], { axis: 5, scale: +1 })).toBe(0);
  });

  it("antagonistic pairs never co-activate", () => {
    const binding = defaultPedalBinding();
    for (const stick of [[0.7, -0.3, 0.1, 0.9], [-0.4, 0.8, -0.6, -0.2]]) {
      const frame = pedalFrame(binding, stick, 0);
      expect(frame.f).toHaveLength(8);
      for (let pair = 0; pair < 4; pair++) {
        const [a, b] = [frame.f[2 * pair], frame.f[2 * pair + 1]];
        expect(Math.min(a, b)).toBe(0);
      }
    }
  });
});

describe("button frame", () => {
  it("maps held keys to switch states", () => {
    const binding = defaultButtonBinding();
    const frame = buttonFrame(binding, new Set(["KeyD", "KeyW"]), 1.5);
    expect(frame.b).toEqual([false, true, true, false, false, false, false, false]);
    expect(frame.t).toBe(1.5);
  });

  it("ignores unbound keys", () => {
    const frame = buttonFrame(defaultButtonBinding(), new Set(["KeyZ"]), 0);
    expect(frame.b.every((v) => !v)).toBe(true);
  });
});
