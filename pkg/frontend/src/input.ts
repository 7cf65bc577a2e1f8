// Input bindings: gamepad axes emulate the eight continuous pedal
// channels (keyboards cannot produce proportional signals); eight keys
// emulate the switch interface.

import type { ButtonFrameMsg, InputFrame, PedalFrame } from "./types";

export interface AxisBinding {
  axis: number; // gamepad axis index
  scale: number; // +/-1 flips direction
}

export interface PedalBinding {
  mode: "pedal";
  channels: (AxisBinding | null)[]; // exactly 8 entries
}

export interface ButtonBinding {
  mode: "button";
  keys: (string | null)[]; // exactly 8 KeyboardEvent.code values
}

export type InputBinding = PedalBinding | ButtonBinding;

export const N_CHANNELS = 8;

// Default pedal layout for a dual-stick + trigger gamepad: each stick
// axis drives an antagonistic channel pair, triggers drive the last
// two pairs. Channel pairs mirror the calibration directions
// (F/B, L/R, TU/TD, LT/RT).
export function defaultPedalBinding(): PedalBinding {
  return {
    mode: "pedal",
    channels: [
      { axis: 1, scale: -1 }, // forward push
      { axis: 1, scale: +1 }, // backward
      { axis: 0, scale: -1 }, // left
      { axis: 0, scale: +1 }, // right
      { axis: 3, scale: -1 }, // toe up
      { axis: 3, scale: +1 }, // toe down
      { axis: 2, scale: -1 }, // left torsion
      { axis: 2, scale: +1 }, // right torsion
    ],
  };
}

// Keyboard layout for the switch interface, matching the button
// numbering: 1/2 -x/+x, 3/4 +y/-y, 5/6 -z/+z, 7/8 +theta/-theta.
export function defaultButtonBinding(): ButtonBinding {
  return {
    mode: "button",
    keys: ["KeyA", "KeyD", "KeyW", "KeyS", "KeyF", "KeyR", "KeyQ", "KeyE"],
  };
}

export function bindingComplete(binding: InputBinding): boolean {
  if (binding.mode === "pedal") {
    return (
      binding.channels.length === N_CHANNELS &&
      binding.channels.every((c) => c !== null)
    );
  }
  return binding.keys.length === N_CHANNELS && binding.keys.every((k) => !!k);
}

// A half-axis read: positive part of (axis value * scale), so each
// channel reports only the push in its own direction, like a load cell.
export function channelValue(axes: readonly number[], b: AxisBinding): number {
  const v = (axes[b.axis] ?? 0) * b.scale;
  return v > 0 ? Math.min(1, v) : 0;
}

export function pedalFrame(
  binding: PedalBinding,
  axes: readonly number[],
  t: number,
): PedalFrame {
  const f = binding.channels.map((c) => (c ? channelValue(axes, c) : 0));
  return { kind: "force", t, f };
}

export function buttonFrame(
  binding: ButtonBinding,
  pressedCodes: ReadonlySet<string>,
  t: number,
): ButtonFrameMsg {
  const b = binding.keys.map((k) => (k ? pressedCodes.has(k) : false));
  return { kind: "button", t, b };
}

// Live gamepad/keyboard sources (thin browser layer over the pure maps).

export class GamepadSource {
  read(): number[] | null {
    const pads = navigator.getGamepads?.() ?? [];
    const pad = pads.find((p) => p && p.connected);
    return pad ? [...pad.axes] : null;
  }
}

export class KeyboardSource {
  readonly pressed = new Set<string>();

  attach(target: Window = window): void {
    target.addEventListener("keydown", (e) => this.pressed.add(e.code));
    target.addEventListener("keyup", (e) => this.pressed.delete(e.code));
    target.addEventListener("blur", () => this.pressed.clear());
  }
}

export function sampleInput(
  binding: InputBinding,
  t: number,
  axes: readonly number[] | null,
  pressed: ReadonlySet<string>,
): InputFrame {
  if (binding.mode === "pedal") {
    return pedalFrame(binding, axes ?? [], t);
  }
  return buttonFrame(binding, pressed, t);
}
