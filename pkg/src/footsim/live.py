"""Interactive session runtime shared by the WebSocket and UDP services.

A live session owns the engine for a block of trials, maps incoming
input frames (or raw velocity commands) to the simulator at the command
rate, logs every tick to per-trial JSONL files, and rolls to the next
trial (alternating direction) whenever one completes. The service layer
decides pacing: lockstep mode ticks once per client message, live mode
ticks on a wall clock with the latest input.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from .calibration import CalibrationMap
from .core import ButtonFrame, ForceFrame, VelocityCommand
from .engine import Engine
from .experiment import trial_direction
from .mapping import MappingConfig, map_buttons, map_pedal
from .metrics import MetricsError, MetricsReport, SmoothnessConfig, compute_metrics
from .paths import get_path
from .robot import SimConfig
from .session import SessionHeader, SessionWriter


class LiveSessionError(RuntimeError):
    pass


@dataclass
class TrialOutcome:
    trial_no: int
    trial_id: str
    direction: str
    completed: bool
    metrics: MetricsReport | None
    log_path: str | None


class LiveSession:
    """One interface + course + operator-in-the-loop block of trials."""

    def __init__(
        self,
        path_id: str,
        interface: str,
        cmap: CalibrationMap | None = None,
        mapping: MappingConfig | None = None,
        sim: SimConfig | None = None,
        smoothness: SmoothnessConfig | None = None,
        trials: int = 10,
        log_dir=None,
        session_id: str | None = None,
    ):
        if interface not in ("pedal", "button", "velocity"):
            raise LiveSessionError(f"unknown interface {interface!r}")
        if interface == "pedal" and cmap is None:
            raise LiveSessionError("pedal sessions need a calibration map")
        self.path_id = path_id
        self.interface = interface
        self.cmap = cmap
        self.mapping = mapping or MappingConfig()
        self.sim_cfg = sim or SimConfig()
        self.smoothness = smoothness or SmoothnessConfig()
        self.trials = trials
        self.session_id = session_id or time.strftime("session-%Y%m%d-%H%M%S")
        self.log_dir = None
        if log_dir is not None:
            self.log_dir = Path(log_dir) / self.session_id
            self.log_dir.mkdir(parents=True, exist_ok=True)
        self.path = get_path(path_id)
        self.outcomes: list[TrialOutcome] = []
        self.seq_out = 0
        self.finished = False
        self._latest: ForceFrame | ButtonFrame | None = None
        self._pending_cmd: VelocityCommand | None = None
        self._trial_no = 0
        self._engine: Engine | None = None
        self._writer: SessionWriter | None = None
        self._next_trial()

    # -- input side ----------------------------------------------------------

    def submit_input(self, frame: ForceFrame | ButtonFrame) -> None:
        if self.interface == "pedal" and not isinstance(frame, ForceFrame):
            raise LiveSessionError("pedal session expects force frames")
        if self.interface == "button" and not isinstance(frame, ButtonFrame):
            raise LiveSessionError("button session expects button frames")
        if self.interface == "velocity":
            raise LiveSessionError("velocity session expects commands, not frames")
        self._latest = frame

    def submit_command(self, cmd: VelocityCommand) -> None:
        if self.interface != "velocity":
            raise LiveSessionError("input-frame session expects frames, not commands")
        self._pending_cmd = cmd

    # -- trial lifecycle -----------------------------------------------------

    def _next_trial(self) -> None:
        self._trial_no += 1
        direction = trial_direction(self._trial_no)
        trial_id = f"{self.session_id}-{self._trial_no:02d}"
        self._engine = Engine(self.path, direction, trial_id, sim_cfg=self.sim_cfg)
        self._writer = None
        if self.log_dir is not None:
            header = SessionHeader(
                path_id=self.path_id,
                direction=direction,
                interface=self.interface,
                trial_id=trial_id,
                sim=self.sim_cfg,
                mapping=self.mapping,
                cmap=self.cmap,
                map_checksum=self.cmap.checksum() if self.cmap else None,
            )
            self._writer = SessionWriter(
                self.log_dir / f"trial_{self._trial_no:02d}.jsonl", header
            )

    def _close_trial(self, completed: bool) -> TrialOutcome:
        engine = self._engine
        metrics = None
        if completed:
            try:
                metrics = compute_metrics(engine.trace, self.smoothness)
            except MetricsError:
                metrics = None
        log_path = None
        if self._writer is not None:
            self._writer.finish(engine.trace)
            log_path = str(self._writer.path)
        outcome = TrialOutcome(
            trial_no=self._trial_no,
            trial_id=engine.trace.trial_id,
            direction=engine.trace.direction,
            completed=completed,
            metrics=metrics,
            log_path=log_path,
        )
        self.outcomes.append(outcome)
        return outcome

    # -- ticking -------------------------------------------------------------

    def tick(self) -> dict:
        """Advance one command window; returns the state message."""
        if self.finished:
            raise LiveSessionError("session already finished")
        engine = self._engine
        if self.interface == "velocity":
            ingested = self._pending_cmd is not None
            raw = self._pending_cmd if ingested else engine.sim.held
            frame = None
            self._pending_cmd = None
        else:
            frame = self._latest
            if frame is None:
                raw = VelocityCommand.zero()
                ingested = True
            elif isinstance(frame, ForceFrame):
                raw = map_pedal(frame, self.cmap, self.mapping)
                ingested = True
            else:
                raw = map_buttons(frame, self.mapping)
                ingested = True
        sample = engine.command_tick(frame, raw, ingested=ingested)
        if self._writer is not None:
            self._writer.write_sample(sample)
        self.seq_out += 1
        event = None
        if engine.done():
            outcome = self._close_trial(completed=True)
            event = {
                "type": "trial_complete",
                "trial": outcome.trial_no,
                "trial_id": outcome.trial_id,
                "direction": outcome.direction,
                "metrics": outcome.metrics.to_dict() if outcome.metrics else None,
                "log_path": outcome.log_path,
            }
            if self.trials and self._trial_no >= self.trials:
                self.finished = True
            else:
                self._next_trial()
        state = {
            "type": "state",
            "seq": self.seq_out,
            "t": sample.t,
            "pose": list(sample.pose.as_tuple()),
            "filtered": list(sample.filtered),
            "raw": list(sample.raw.as_tuple()),
            "touch": sample.touch,
            "zone": sample.zone,
            "phase": self._engine.trial.phase if not self.finished else "finished",
            "trial": self._trial_no if not self.finished else self.trials,
            "finished": self.finished,
        }
        if event is not None:
            state["event"] = event
        return state

    def finish(self) -> dict:
        """Close the current trial (incomplete) and summarise the session."""
        if not self.finished:
            if self._engine is not None and self._engine.trace.samples:
                self._close_trial(completed=self._engine.done())
            elif self._writer is not None:
                self._writer.abort()
            self.finished = True
        return self.summary()

    def summary(self) -> dict:
        return {
            "type": "session_summary",
            "session_id": self.session_id,
            "path_id": self.path_id,
            "interface": self.interface,
            "trials": [
                {
                    "trial": o.trial_no,
                    "trial_id": o.trial_id,
                    "direction": o.direction,
                    "completed": o.completed,
                    "metrics": o.metrics.to_dict() if o.metrics else None,
                    "log_path": o.log_path,
                }
                for o in self.outcomes
            ],
        }
