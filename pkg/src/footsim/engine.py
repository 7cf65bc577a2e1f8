"""The canonical command-tick loop shared by every execution mode.

Headless experiments, interactive bridge sessions and log replay all
advance the world through :meth:`Engine.command_tick`, so a replayed
input stream reproduces poses bit for bit. Each tick ingests one
command, runs the physics substeps, updates the trial machine on every
substep and samples the buzzer on the 20 Hz grid.
"""

from __future__ import annotations

import math

from .core import (
    DIRECTION_LTR,
    ButtonFrame,
    ForceFrame,
    ToolPose,
    TraceSample,
    TrialTrace,
    VelocityCommand,
    wrap_angle,
)
from .robot import RobotSim, SimConfig
from .task import (
    DEFAULT_RING_INNER_RADIUS,
    RingTool,
    TrialRunner,
    WirePath,
    wire_ring_clearance,
)

TOUCH_RATE = 20.0


class EngineError(RuntimeError):
    pass


class Engine:
    """Binds a robot simulator, a wire course and one trial together."""

    def __init__(
        self,
        path: WirePath,
        direction: str,
        trial_id: str,
        sim_cfg: SimConfig | None = None,
        ring_inner_radius: float = DEFAULT_RING_INNER_RADIUS,
        initial_theta: float | None = None,
    ):
        self.sim_cfg = sim_cfg or SimConfig()
        if self.sim_cfg.physics_rate % TOUCH_RATE != 0:
            raise EngineError("physics_rate must be a multiple of the 20 Hz touch rate")
        self._touch_every = round(self.sim_cfg.physics_rate / TOUCH_RATE)
        self.path = path
        self.ring_inner_radius = ring_inner_radius
        self.trial = TrialRunner(path, direction)
        start = self.trial.start_center
        theta0 = self._travel_start_theta() if initial_theta is None else initial_theta
        pose0 = ToolPose(start[0], start[1], start[2], theta0)
        self.sim = RobotSim(self.sim_cfg, pose0)
        self.trace = TrialTrace(
            trial_id=trial_id,
            direction=direction,
            sample_rate=self.sim_cfg.command_rate,
            touch_rate=TOUCH_RATE,
        )
        self.last_touch = False
        self._sync_trace_events()

    def _travel_start_theta(self) -> float:
        if self.trial.direction == DIRECTION_LTR:
            _, tangent = self.path.point_and_tangent(0.0)
        else:
            _, tangent = self.path.point_and_tangent(self.path.total_length)
            tangent = -tangent
        return wrap_angle(math.degrees(math.atan2(tangent[1], tangent[0])))

    def _sync_trace_events(self) -> None:
        self.trace.t_start = self.trial.t_start
        self.trace.t_end = self.trial.t_end
        self.trace.fault = self.trial.fault
        self.trace.touch_flags = self.trial.touch_flags

    def command_tick(
        self,
        input_frame: ForceFrame | ButtonFrame | None,
        raw: VelocityCommand,
        ingested: bool = True,
    ) -> TraceSample:
        """Advance a full command window; ingest ``raw`` unless told not to."""
        t_tick = self.sim.t
        if ingested:
            self.sim.ingest(raw)
        filtered = self.sim.filtered
        for _ in range(self.sim_cfg.substeps):
            filtered = self.sim.step()
            zone = self.trial.update(self.sim.pose, self.sim.t)
            if self.sim.tick % self._touch_every == 0:
                ring = RingTool(self.sim.pose, self.ring_inner_radius)
                self.last_touch = wire_ring_clearance(ring, self.path) < 0.0
                self.trial.record_touch(self.last_touch)
        sample = TraceSample(
            t=t_tick,
            input=input_frame,
            raw=raw,
            filtered=filtered,
            pose=self.sim.pose,
            touch=self.last_touch,
            zone=zone,
            ingested=ingested,
        )
        self.trace.samples.append(sample)
        self._sync_trace_events()
        return sample

    def done(self) -> bool:
        return self.trial.completed()

    @property
    def t(self) -> float:
        return self.sim.t
