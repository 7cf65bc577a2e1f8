// Canvas rendering: top view (x, y) plus a side strip for z. The
// projection math is pure and unit-tested; drawing is a thin layer.

import type { PathDetail, StateMsg } from "./types";

export interface Viewport {
  scale: number; // px per mm
  offsetX: number; // px
  offsetY: number;
  // world y points up on screen
}

export function fitViewport(
  polyline: number[][],
  width: number,
  height: number,
  margin = 30,
): Viewport {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of polyline) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(1e-6, maxX - minX);
  const spanY = Math.max(1e-6, maxY - minY);
  const scale = Math.min((width - 2 * margin) / spanX, (height - 2 * margin) / spanY);
  return {
    scale,
    offsetX: margin - minX * scale + (width - 2 * margin - spanX * scale) / 2,
    offsetY: height - margin + minY * scale - (height - 2 * margin - spanY * scale) / 2,
  };
}

export function toScreen(v: Viewport, x: number, y: number): [number, number] {
  return [v.offsetX + x * v.scale, v.offsetY - y * v.scale];
}

export class SceneRenderer {
  private vp: Viewport | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly sideStrip: HTMLCanvasElement,
  ) {}

  private get ctx(): CanvasRenderingContext2D {
    return this.canvas.getContext("2d")!;
  }

  setPath(path: PathDetail): void {
    this.vp = fitViewport(path.polyline, this.canvas.width, this.canvas.height);
  }

  draw(path: PathDetail, state: StateMsg | null): void {
    const ctx = this.ctx;
    const vp = this.vp ?? fitViewport(path.polyline, this.canvas.width, this.canvas.height);
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);

    // wire
    ctx.strokeStyle = "#888";
    ctx.lineWidth = Math.max(2, 2 * path.wire_radius_mm * vp.scale);
    ctx.lineCap = "round";
    ctx.beginPath();
    path.polyline.forEach(([x, y], i) => {
      const [sx, sy] = toScreen(vp, x, y);
      i === 0 ? ctx.moveTo(sx, sy) : ctx.lineTo(sx, sy);
    });
    ctx.stroke();

    // start/end trigger plates
    for (const [pt, color] of [
      [path.start, "#2a7"],
      [path.end, "#a33"],
    ] as const) {
      const [sx, sy] = toScreen(vp, pt[0], pt[1]);
      ctx.strokeStyle = color;
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(sx, sy, 5 * vp.scale, 0, 2 * Math.PI);
      ctx.stroke();
    }

    if (state) this.drawRing(ctx, vp, path, state);
    this.drawSideStrip(path, state);
  }

  private drawRing(
    ctx: CanvasRenderingContext2D,
    vp: Viewport,
    path: PathDetail,
    state: StateMsg,
  ): void {
    const [x, y, , thetaDeg] = state.pose;
    const [sx, sy] = toScreen(vp, x, y);
    const r = path.ring_inner_radius_mm * vp.scale;
    const theta = (thetaDeg * Math.PI) / 180;
    // The ring axis is horizontal: in top view the circle projects to a
    // bar perpendicular to the axis, drawn with its heading tick.
    ctx.strokeStyle = state.touch ? "#e33" : "#06c";
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(sx - r * Math.sin(theta) * -1, sy - r * Math.cos(theta));
    ctx.lineTo(sx + r * Math.sin(theta) * -1, sy + r * Math.cos(theta));
    ctx.stroke();
    ctx.beginPath();
    ctx.arc(sx, sy, 3, 0, 2 * Math.PI);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fill();
    ctx.strokeStyle = "#06c8";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.moveTo(sx, sy);
    ctx.lineTo(sx + 14 * Math.cos(theta), sy - 14 * Math.sin(theta));
    ctx.stroke();
  }

  private drawSideStrip(path: PathDetail, state: StateMsg | null): void {
    const ctx = this.sideStrip.getContext("2d")!;
    const { width, height } = this.sideStrip;
    ctx.clearRect(0, 0, width, height);
    const zMax = Math.max(path.z_extent_mm, 1);
    ctx.fillStyle = "#666";
    ctx.font = "11px system-ui";
    ctx.fillText("z", 4, 12);
    ctx.strokeStyle = "#888";
    ctx.strokeRect(20, 8, width - 30, height - 16);
    if (state) {
      const z = state.pose[2];
      const frac = Math.min(1, Math.max(0, z / zMax));
      const y = height - 8 - frac * (height - 16);
      ctx.fillStyle = state.touch ? "#e33" : "#06c";
      ctx.fillRect(22, y - 2, width - 34, 4);
      ctx.fillStyle = "#333";
      ctx.fillText(`${z.toFixed(1)} mm`, 24, 12);
    }
  }
}
