"""Synthetic operators driving the two interfaces headlessly.

The pedal operator is a pursuit tracker: it chases a carrot placed a
lookahead distance along the tangent at its closest path point (the
tangent carrot keeps the steady-state offset on arcs near zero, where
chasing a point on the arc itself would cut inside), aligns the ring
axis with the upcoming tangent, inverts the dead-zone/gain mapping to
get activations, and renders them through the subject's ground-truth
mixing with low-pass-filtered motor noise and a reaction delay.

The button operator re-plans every decision period with timed taps:
pull the ring back over the wire first, untilt it next, otherwise
advance along the dominant tangent axis (sometimes chording the second
axis). Moving the foot to different buttons costs the switch latency
with everything released. This yields the axis-by-axis staircase the
discrete interface forces.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationMap
from .core import (
    DIRECTION_LTR,
    ButtonFrame,
    ForceFrame,
    ToolPose,
    wrap_half_angle,
)
from .mapping import MappingConfig
from .synthetic import SyntheticSubject
from .task import WirePath


@dataclass(frozen=True)
class PedalOperatorConfig:
    lookahead: float = 15.0          # mm along the tangent
    gain: float = 2.5                # 1/s, position error to velocity
    reaction_delay: float = 0.15     # s
    noise_sigma: float = 0.02        # activation units, after low-pass
    noise_cutoff_hz: float = 2.0
    rot_gain: float = 2.0            # 1/s, heading error to turn rate
    align_slowdown_deg: float = 25.0  # misalignment where translation slows

    def __post_init__(self):
        if self.lookahead <= 0:
            raise ValueError("lookahead must be positive")


@dataclass(frozen=True)
class ButtonOperatorConfig:
    decision_period: float = 0.3     # s between re-plans
    switch_latency: float = 0.2      # s released while moving the foot
    chord_probability: float = 0.2   # chance of pressing a second button
    lookahead: float = 8.0           # mm along the tangent
    dev_tol: float = 0.8             # mm off the wire before a corrective tap
    theta_band: float = 18.0         # deg of ring tilt tolerated before fixing
    theta_target: float = 5.0        # deg, tilt a rotation tap aims for
    stop_lag_comp: float = 0.045     # s of filter coast subtracted from taps

    def __post_init__(self):
        if self.decision_period <= 0 or self.switch_latency < 0:
            raise ValueError("periods must be positive")
        if not 0.0 <= self.chord_probability <= 1.0:
            raise ValueError("chord_probability must be within [0, 1]")


def _travel_path(path: WirePath, direction: str) -> WirePath:
    return path if direction == DIRECTION_LTR else path.reversed()


def _carrot(path: WirePath, pose: ToolPose, lookahead: float):
    """Carrot point, its tangent, and the remaining arc length."""
    pos = np.array([pose.x_t, pose.y_t, pose.z_t])
    s_star, _ = path.closest(pos)
    point, tangent = path.point_and_tangent(s_star)
    remaining = path.total_length - s_star
    if remaining <= lookahead:
        carrot = path.end_point()
    else:
        carrot = point + tangent * lookahead
    _, tangent_ahead = path.point_and_tangent(min(s_star + lookahead, path.total_length))
    return pos, carrot, tangent_ahead, remaining


def _tangent_azimuth(tangent: np.ndarray) -> float | None:
    horiz = math.hypot(tangent[0], tangent[1])
    if horiz < 1e-9:
        return None
    return math.degrees(math.atan2(tangent[1], tangent[0]))


class PedalOperator:
    """Continuous tracker for a calibrated synthetic subject."""

    def __init__(
        self,
        cfg: PedalOperatorConfig,
        subject: SyntheticSubject,
        cmap: CalibrationMap,
        mapping_cfg: MappingConfig,
        path: WirePath,
        direction: str,
        command_rate: float,
        seed: int = 0,
    ):
        self.cfg = cfg
        self.subject = subject
        self.cmap = cmap
        self.mapping_cfg = mapping_cfg
        self.path = _travel_path(path, direction)
        self.rate = command_rate
        self.rng = np.random.default_rng(seed)
        delay_ticks = round(cfg.reaction_delay * command_rate)
        self._delay_ticks = delay_ticks
        self._queue: deque[np.ndarray] = deque([np.zeros(4)] * delay_ticks)
        self._noise = np.zeros(4)
        self._noise_alpha = 1.0 - math.exp(-2.0 * math.pi * cfg.noise_cutoff_hz / command_rate)
        # Keep the filtered-noise standard deviation at noise_sigma.
        a = 1.0 - self._noise_alpha
        self._noise_drive = cfg.noise_sigma * math.sqrt((1.0 + a) / (1.0 - a)) if cfg.noise_sigma else 0.0

    def _desired_velocity(self, pose: ToolPose) -> np.ndarray:
        cfg = self.cfg
        m = self.mapping_cfg
        pos, carrot, tangent_ahead, _ = _carrot(self.path, pose, cfg.lookahead)
        err = carrot - pos
        v = cfg.gain * err
        # Preserve direction under the per-axis translation limit.
        peak = max(abs(v[0]), abs(v[1]), abs(v[2]))
        scale = 1.0 if peak <= m.v_max_trans else m.v_max_trans / peak
        az = _tangent_azimuth(tangent_ahead)
        w = 0.0
        if az is not None:
            dtheta = wrap_half_angle(az - pose.theta_t)
            w = max(-m.w_max_rot, min(m.w_max_rot, cfg.rot_gain * dtheta))
            # Slow down while badly misaligned so the ring can catch up.
            if abs(dtheta) > cfg.align_slowdown_deg:
                over = abs(dtheta) - cfg.align_slowdown_deg
                scale *= max(0.3, 1.0 - over / 45.0)
        return np.array([v[0] * scale, v[1] * scale, v[2] * scale, w])

    def _to_activation(self, v_des: np.ndarray) -> np.ndarray:
        u = np.zeros(4)
        for i in range(4):
            mag = abs(v_des[i])
            if mag < 1e-12:
                continue
            u[i] = math.copysign(
                mag / self.cmap.gain[i] + self.cmap.dead_zone[i], v_des[i]
            )
        return u

    def step(self, t: float, pose: ToolPose) -> ForceFrame:
        u_des = self._to_activation(self._desired_velocity(pose))
        if self.cfg.noise_sigma:
            drive = self.rng.normal(0.0, self._noise_drive, size=4)
            self._noise += self._noise_alpha * (drive - self._noise)
            u_des = u_des + self._noise
        if self._delay_ticks:
            self._queue.append(u_des)
            u_out = self._queue.popleft()
        else:
            u_out = u_des
        return self.subject.force_frame(t, u_out)


# Button index (0-based) for each (axis, positive?) pair; see mapping table.
_AXIS_BUTTON = {
    (0, False): 0,
    (0, True): 1,
    (1, True): 2,
    (1, False): 3,
    (2, False): 4,
    (2, True): 5,
    (3, True): 6,
    (3, False): 7,
}


class ButtonOperator:
    """Discrete re-planner with timed taps and switch travel latency.

    Every decision period the operator picks the axis with the largest
    time-to-fix and presses its button just long enough to cover the
    remaining error (minus the filter coast), occasionally chording a
    second button. Ring tilt is corrected only once it leaves the
    tolerated band; switching to different buttons costs the switch
    latency with everything released.
    """

    def __init__(
        self,
        cfg: ButtonOperatorConfig,
        mapping_cfg: MappingConfig,
        path: WirePath,
        direction: str,
        command_rate: float,
        seed: int = 0,
    ):
        self.cfg = cfg
        self.mapping_cfg = mapping_cfg
        self.path = _travel_path(path, direction)
        self.rate = command_rate
        self.rng = np.random.default_rng(seed)
        self._active: dict[int, float] = {}   # button -> release time
        self._pending: tuple[float, dict[int, float]] | None = None  # (start, taps)
        self._last_set: frozenset[int] = frozenset()
        self._last_release = -math.inf
        self._next_decision = 0.0

    def _plan(self, t: float, pose: ToolPose) -> dict[int, float]:
        """Chosen buttons with their per-button release times.

        Priority order mirrors a careful operator: first pull the ring
        back over the wire, then untilt it, then advance along the
        dominant tangent axis (chording the second axis sometimes).
        """
        cfg = self.cfg
        m = self.mapping_cfg
        pos = np.array([pose.x_t, pose.y_t, pose.z_t])
        s_star, _ = self.path.closest(pos)
        point, tangent = self.path.point_and_tangent(s_star)
        dev = point - pos  # from tool to the wire, perpendicular at s*
        remaining = self.path.total_length - s_star
        _, tangent_ahead = self.path.point_and_tangent(
            min(s_star + cfg.lookahead, self.path.total_length)
        )
        az = _tangent_azimuth(tangent_ahead)
        dtheta = 0.0 if az is None else wrap_half_angle(az - pose.theta_t)

        chosen: list[tuple[int, float]] = []  # (button, tap seconds)
        dev_axis = int(np.argmax(np.abs(dev)))
        if abs(dev[dev_axis]) > cfg.dev_tol:
            tap = abs(dev[dev_axis]) / m.button_speed_trans
            chosen.append((_AXIS_BUTTON[(dev_axis, dev[dev_axis] > 0)], tap))
        elif abs(dtheta) > cfg.theta_band:
            tap = (abs(dtheta) - cfg.theta_target) / m.button_speed_rot
            chosen.append((_AXIS_BUTTON[(3, dtheta > 0)], tap))
        else:
            order = np.argsort(-np.abs(tangent[:3]))
            lead = int(order[0])
            tap = cfg.decision_period
            if remaining < 2 * cfg.lookahead:
                tap = min(tap, max(0.1, remaining / m.button_speed_trans))
            chosen.append((_AXIS_BUTTON[(lead, tangent[lead] > 0)], tap))
            second = int(order[1])
            if (
                abs(tangent[second]) >= 0.35 * abs(tangent[lead])
                and self.rng.random() < cfg.chord_probability
            ):
                ratio = abs(tangent[second]) / abs(tangent[lead])
                chosen.append((_AXIS_BUTTON[(second, tangent[second] > 0)], tap * ratio))

        plan: dict[int, float] = {}
        for button, tap in chosen:
            tap = min(cfg.decision_period, tap - cfg.stop_lag_comp)
            if tap > 0:
                plan[button] = tap
        return plan

    def _activate(self, start: float, taps: dict[int, float]) -> None:
        self._active = {b: start + tap for b, tap in taps.items()}
        self._last_set = frozenset(taps)
        self._last_release = max(self._active.values())

    def step(self, t: float, pose: ToolPose) -> ButtonFrame:
        if self._pending is not None and t >= self._pending[0]:
            self._activate(t, self._pending[1])
            self._pending = None
        if t >= self._next_decision and self._pending is None:
            self._next_decision = t + self.cfg.decision_period
            taps = self._plan(t, pose)
            if taps:
                target = frozenset(taps)
                held = frozenset(b for b, u in self._active.items() if u > t)
                if held and target.isdisjoint(held):
                    # Foot must lift off and travel to the new buttons.
                    self._active = {}
                    self._last_release = t
                    self._pending = (t + self.cfg.switch_latency, taps)
                elif held or not target.isdisjoint(self._last_set):
                    self._activate(t, taps)
                else:
                    # Hovering: travel time since the last release still applies.
                    start = max(t, self._last_release + self.cfg.switch_latency)
                    if start <= t:
                        self._activate(t, taps)
                    else:
                        self._pending = (start, taps)
        pressed = tuple(b in self._active and self._active[b] > t for b in range(8))
        return ButtonFrame(t, pressed)
