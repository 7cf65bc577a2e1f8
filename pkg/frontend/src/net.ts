// Server connection: REST helpers plus the session WebSocket. The UI
// holds no simulation truth; every metric shown comes from the server.

import type {
  InputFrame,
  PathDetail,
  ServerMsg,
  SolvedMap,
  CalibrationSample,
} from "./types";

export function parseServerMsg(text: string): ServerMsg {
  const msg = JSON.parse(text);
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error("malformed server message");
  }
  return msg as ServerMsg;
}

export function inputMessage(frame: InputFrame): string {
  return JSON.stringify({ type: "input", frame });
}

export function helloMessage(map: SolvedMap | null, syntheticSeed: number | null): string {
  const body: Record<string, unknown> = { type: "hello" };
  if (map) body.map = { w: map.w, dead_zone: map.dead_zone, gain: map.gain };
  else if (syntheticSeed !== null) body.synthetic_seed = syntheticSeed;
  return JSON.stringify(body);
}

export async function fetchPaths(base = ""): Promise<PathDetail[]> {
  const list = await (await fetch(`${base}/api/paths`)).json();
  return Promise.all(
    list.map(async (p: { id: string }) =>
      (await fetch(`${base}/api/paths/${p.id}`)).json(),
    ),
  );
}

export async function solveCalibration(
  samples: CalibrationSample[],
  base = "",
): Promise<{ map: SolvedMap; quality: { iterations: number; axis_correlation: number[] } }> {
  const resp = await fetch(`${base}/api/calibration/solve`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ dataset: { samples } }),
  });
  if (!resp.ok) {
    const body = await resp.json().catch(() => ({ detail: resp.statusText }));
    throw new Error(body.detail ?? "calibration rejected");
  }
  return resp.json();
}

export interface SessionHooks {
  onMessage: (msg: ServerMsg) => void;
  onClose: (clean: boolean) => void;
}

export class SessionSocket {
  private ws: WebSocket | null = null;

  constructor(private readonly hooks: SessionHooks) {}

  open(params: {
    interface: string;
    path: string;
    trials: number;
    map: SolvedMap | null;
    syntheticSeed: number | null;
    base?: string;
  }): void {
    const proto = location.protocol === "https:" ? "wss" : "ws";
    const base = params.base ?? `${proto}://${location.host}`;
    const url =
      `${base}/ws/session?interface=${params.interface}` +
      `&path=${params.path}&mode=live&trials=${params.trials}`;
    this.ws = new WebSocket(url);
    this.ws.onopen = () =>
      this.ws?.send(helloMessage(params.map, params.syntheticSeed));
    this.ws.onmessage = (ev) => this.hooks.onMessage(parseServerMsg(ev.data));
    this.ws.onclose = (ev) => this.hooks.onClose(ev.wasClean);
    this.ws.onerror = () => this.hooks.onClose(false);
  }

  sendFrame(frame: InputFrame): void {
    if (this.ws?.readyState === WebSocket.OPEN) this.ws.send(inputMessage(frame));
  }

  end(): void {
    if (this.ws?.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify({ type: "end" }));
    }
  }

  close(): void {
    this.ws?.close();
    this.ws = null;
  }

  get connected(): boolean {
    return this.ws?.readyState === WebSocket.OPEN;
  }
}
