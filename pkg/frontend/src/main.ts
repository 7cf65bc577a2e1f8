// Application wiring: one requestAnimationFrame loop samples the input,
// streams it to the server and renders the latest state in the same
// tick, so input-to-render latency is bounded by a single frame plus
// the server round trip.

import {
  GamepadSource,
  KeyboardSource,
  bindingComplete,
  defaultButtonBinding,
  defaultPedalBinding,
  sampleInput,
  type InputBinding,
} from "./input";
import { hudFromState, summaryLine, trialRow } from "./hud";
import { SessionSocket, fetchPaths, solveCalibration } from "./net";
import { SceneRenderer } from "./render";
import { CalibrationWizard } from "./wizard";
import type { PathDetail, ServerMsg, SolvedMap, StateMsg } from "./types";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const ui = {
  canvas: () => el<HTMLCanvasElement>("scene"),
  side: () => el<HTMLCanvasElement>("side-strip"),
  phase: () => el<HTMLDivElement>("phase"),
  timer: () => el<HTMLDivElement>("timer"),
  buzzer: () => el<HTMLDivElement>("buzzer"),
  trials: () => el<HTMLUListElement>("trials"),
  status: () => el<HTMLDivElement>("status"),
  meter: () => el<HTMLDivElement>("input-meter"),
  wizardBox: () => el<HTMLDivElement>("wizard"),
  wizardPrompt: () => el<HTMLDivElement>("wizard-prompt"),
  pathSelect: () => el<HTMLSelectElement>("path-select"),
  modeSelect: () => el<HTMLSelectElement>("mode-select"),
};

interface AppState {
  paths: PathDetail[];
  path: PathDetail | null;
  binding: InputBinding;
  map: SolvedMap | null;
  socket: SessionSocket | null;
  lastState: StateMsg | null;
  runningSince: number | null;
  wizard: CalibrationWizard | null;
  paused: boolean;
  t0: number;
}

const app: AppState = {
  paths: [],
  path: null,
  binding: defaultButtonBinding(),
  map: null,
  socket: null,
  lastState: null,
  runningSince: null,
  wizard: null,
  paused: false,
  t0: performance.now(),
};

const gamepad = new GamepadSource();
const keyboard = new KeyboardSource();
let renderer: SceneRenderer | null = null;

function status(text: string): void {
  ui.status().textContent = text;
}

function onServerMsg(msg: ServerMsg): void {
  switch (msg.type) {
    case "ready":
      status(`session ${msg.session_id} ready (${msg.interface} on ${msg.path})`);
      break;
    case "state": {
      app.lastState = msg;
      if (msg.phase === "running" && app.runningSince === null) {
        app.runningSince = msg.t;
      }
      if (msg.event) {
        app.runningSince = null;
        const li = document.createElement("li");
        li.textContent = trialRow(msg.event);
        ui.trials().appendChild(li);
      }
      break;
    }
    case "session_summary":
      status(`finished: ${summaryLine(msg.trials)}`);
      app.socket?.close();
      app.socket = null;
      break;
    case "error":
      status(`server error: ${msg.detail}`);
      break;
  }
}

function startSession(): void {
  if (!app.path) return;
  const mode = ui.modeSelect().value as "pedal" | "button";
  app.binding = mode === "pedal" ? defaultPedalBinding() : defaultButtonBinding();
  if (!bindingComplete(app.binding)) {
    status("bind all 8 channels before arming a session");
    return;
  }
  if (mode === "pedal" && !app.map) {
    status("run the calibration wizard first (or use a synthetic map)");
    return;
  }
  app.lastState = null;
  app.runningSince = null;
  ui.trials().replaceChildren();
  app.socket = new SessionSocket({
    onMessage: onServerMsg,
    onClose: (clean) => {
      if (!clean) status("connection lost: session paused, inputs stopped");
      app.paused = true;
    },
  });
  app.paused = false;
  app.socket.open({
    interface: mode,
    path: app.path.id,
    trials: 10,
    map: mode === "pedal" ? app.map : null,
    syntheticSeed: null,
  });
}

function renderMeter(frameValues: number[], hidden: boolean): void {
  const meter = ui.meter();
  meter.style.visibility = hidden ? "hidden" : "visible";
  meter.querySelectorAll<HTMLDivElement>(".bar").forEach((bar, i) => {
    bar.style.height = `${Math.round(100 * Math.min(1, Math.abs(frameValues[i] ?? 0)))}%`;
  });
}

function frameLoop(): void {
  const t = (performance.now() - app.t0) / 1000;
  const axes = gamepad.read();
  const frame = sampleInput(app.binding, t, axes, keyboard.pressed);

  if (app.wizard && app.wizard.state.phase === "recording" && frame.kind === "force") {
    app.wizard.addSample(t, frame.f);
  }
  if (app.socket?.connected && !app.paused) {
    app.socket.sendFrame(frame);
  }
  if (renderer && app.path) {
    renderer.draw(app.path, app.lastState);
  }
  if (app.lastState) {
    const hud = hudFromState(app.lastState, app.runningSince);
    ui.phase().textContent = hud.phaseLabel;
    ui.timer().textContent = hud.timer;
    ui.buzzer().classList.toggle("on", hud.buzzer);
    const values = frame.kind === "force" ? frame.f : frame.b.map((b) => (b ? 1 : 0));
    renderMeter(values, !hud.showInputMeter);
  } else {
    const values = frame.kind === "force" ? frame.f : frame.b.map((b) => (b ? 1 : 0));
    renderMeter(values, false);
  }
  requestAnimationFrame(frameLoop);
}

async function runWizard(): Promise<void> {
  const wizard = new CalibrationWizard();
  app.wizard = wizard;
  const box = ui.wizardBox();
  box.hidden = false;
  const promptEl = ui.wizardPrompt();

  const step = async (): Promise<void> => {
    if (wizard.state.phase === "aborted") {
      box.hidden = true;
      status("calibration aborted: map unchanged");
      return;
    }
    if (wizard.state.phase === "done") {
      box.hidden = true;
      status("uploading calibration...");
      try {
        const solved = await solveCalibration(wizard.dataset().samples);
        app.map = solved.map;
        const corr = solved.quality.axis_correlation
          .map((c) => c.toFixed(2))
          .join(", ");
        status(
          `map installed (checksum ${solved.map.checksum.slice(0, 10)}..., ` +
          `axis correlation ${corr}); take two minutes to test-drive it`,
        );
      } catch (err) {
        status(`calibration rejected: ${(err as Error).message}; map unchanged`);
      }
      app.wizard = null;
      return;
    }
    promptEl.textContent = wizard.prompt();
  };

  el<HTMLButtonElement>("wizard-record").onclick = () => {
    if (wizard.state.phase === "prompt") {
      wizard.startRecording();
      promptEl.textContent = `recording ${wizard.currentDirection}... press stop when back at rest`;
    }
  };
  el<HTMLButtonElement>("wizard-stop").onclick = () => {
    if (wizard.state.phase !== "recording") return;
    wizard.stopRecording();
    if (wizard.segmentLooksHeld()) {
      wizard.accept();
    } else {
      wizard.reject();
      promptEl.textContent = `hold was too short, repeat: ${wizard.prompt()}`;
      return;
    }
    void step();
  };
  el<HTMLButtonElement>("wizard-abort").onclick = () => {
    wizard.abort();
    void step();
  };
  await step();
}

async function boot(): Promise<void> {
  keyboard.attach();
  renderer = new SceneRenderer(ui.canvas(), ui.side());
  try {
    app.paths = await fetchPaths();
  } catch {
    status("cannot reach the server: is `footsim serve` running?");
    return;
  }
  const select = ui.pathSelect();
  for (const p of app.paths) {
    const opt = document.createElement("option");
    opt.value = p.id;
    opt.textContent = `${p.id}: ${p.name} (${p.length_mm.toFixed(0)} mm)`;
    select.appendChild(opt);
  }
  const pickPath = () => {
    app.path = app.paths.find((p) => p.id === select.value) ?? app.paths[0];
    renderer?.setPath(app.path);
  };
  select.onchange = pickPath;
  pickPath();
  el<HTMLButtonElement>("start-session").onclick = startSession;
  el<HTMLButtonElement>("end-session").onclick = () => app.socket?.end();
  el<HTMLButtonElement>("start-wizard").onclick = () => void runWizard();
  status("ready: pick a course, choose an interface, start a session");
  requestAnimationFrame(frameLoop);
}

if (typeof document !== "undefined" && document.getElementById("scene")) {
  void boot();
}
