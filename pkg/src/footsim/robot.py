"""Velocity-controlled end-effector simulator.

Commands arrive at the command rate and are held (zero-order hold)
until replaced. Each velocity channel passes through a second-order
Butterworth low-pass before Euler integration on a finer physics grid,
so numeric error stays well below control-rate effects. A configurable
watchdog zeroes the held command when the stream goes silent.

The filter step response overshoots by about 4.3% (second-order
Butterworth), so the filtered speed can briefly exceed the commanded
bound by that factor; it never exceeds 1.05x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ToolPose, VelocityCommand, wrap_angle


class SimConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    physics_rate: float = 120.0
    command_rate: float = 30.0
    lpf_cutoff: float = 10.0
    lpf_order: int = 2
    watchdog_s: float | None = 0.2

    def __post_init__(self):
        if self.physics_rate < 2 * self.command_rate:
            raise SimConfigError("physics_rate must be at least twice the command rate")
        if not 0 < self.lpf_cutoff < self.physics_rate / 2:
            raise SimConfigError("lpf_cutoff must sit below the physics Nyquist rate")
        if self.lpf_order != 2:
            raise SimConfigError("only the second-order filter is supported")
        if self.substeps * self.command_rate != self.physics_rate:
            raise SimConfigError("physics_rate must be an integer multiple of command_rate")
        if self.watchdog_s is not None and self.watchdog_s <= 0:
            raise SimConfigError("watchdog_s must be positive (or None to disable)")

    @property
    def substeps(self) -> int:
        return round(self.physics_rate / self.command_rate)

    @property
    def dt(self) -> float:
        return 1.0 / self.physics_rate

    def to_dict(self) -> dict:
        return {
            "physics_rate": self.physics_rate,
            "command_rate": self.command_rate,
            "lpf_cutoff": self.lpf_cutoff,
            "lpf_order": self.lpf_order,
            "watchdog_s": self.watchdog_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(**d)


def design_lpf(cutoff: float, rate: float) -> tuple[float, float, float, float, float]:
    """Second-order Butterworth low-pass biquad (b0, b1, b2, a1, a2).

    Bilinear transform with frequency prewarping; unity DC gain by
    construction. Raises when the cutoff reaches the Nyquist rate.
    """
    if not 0 < cutoff < rate / 2:
        raise SimConfigError(f"cutoff {cutoff} Hz must lie in (0, {rate / 2}) Hz")
    k = math.tan(math.pi * cutoff / rate)
    q = 1.0 / math.sqrt(2.0)
    norm = 1.0 / (1.0 + k / q + k * k)
    b0 = k * k * norm
    b1 = 2.0 * b0
    b2 = b0
    a1 = 2.0 * (k * k - 1.0) * norm
    a2 = (1.0 - k / q + k * k) * norm
    return (b0, b1, b2, a1, a2)


class Biquad:
    """Streaming biquad filter, transposed direct form II."""

    __slots__ = ("b0", "b1", "b2", "a1", "a2", "s1", "s2")

    def __init__(self, coeffs: tuple[float, float, float, float, float]):
        self.b0, self.b1, self.b2, self.a1, self.a2 = coeffs
        self.s1 = 0.0
        self.s2 = 0.0

    def reset(self) -> None:
        self.s1 = 0.0
        self.s2 = 0.0

    def step(self, x: float) -> float:
        y = self.b0 * x + self.s1
        self.s1 = self.b1 * x - self.a1 * y + self.s2
        self.s2 = self.b2 * x - self.a2 * y
        return y


@dataclass
class SimState:
    """Immutable snapshot of the simulator."""

    pose: ToolPose
    last_command: VelocityCommand
    filtered: tuple[float, float, float, float]
    t: float
    tick: int


class RobotSim:
    """Deterministic fixed-rate end-effector integrator."""

    def __init__(self, cfg: SimConfig | None = None, initial_pose: ToolPose | None = None):
        self.cfg = cfg or SimConfig()
        coeffs = design_lpf(self.cfg.lpf_cutoff, self.cfg.physics_rate)
        self._filters = [Biquad(coeffs) for _ in range(4)]
        self.pose = initial_pose or ToolPose(0.0, 0.0, 0.0, 0.0)
        self.held = VelocityCommand.zero()
        self.filtered = (0.0, 0.0, 0.0, 0.0)
        self.tick = 0
        self._last_ingest_t: float | None = None

    @property
    def t(self) -> float:
        return self.tick / self.cfg.physics_rate

    def reset(self, pose: ToolPose) -> None:
        self.pose = pose
        self.held = VelocityCommand.zero()
        self.filtered = (0.0, 0.0, 0.0, 0.0)
        self.tick = 0
        self._last_ingest_t = None
        for f in self._filters:
            f.reset()

    def ingest(self, cmd: VelocityCommand) -> None:
        """Replace the held command (last writer wins within a window)."""
        self.held = cmd
        self._last_ingest_t = self.t

    def _effective(self) -> tuple[float, float, float, float]:
        wd = self.cfg.watchdog_s
        if wd is not None and (
            self._last_ingest_t is None or self.t - self._last_ingest_t > wd
        ):
            return (0.0, 0.0, 0.0, 0.0)
        return self.held.as_tuple()

    def step(self) -> tuple[float, float, float, float]:
        """Advance one physics tick; returns the filtered velocity."""
        vx, vy, vz, wz = self._effective()
        f = self._filters
        fx = f[0].step(vx)
        fy = f[1].step(vy)
        fz = f[2].step(vz)
        fw = f[3].step(wz)
        dt = self.cfg.dt
        p = self.pose
        self.pose = ToolPose(
            p.x_t + fx * dt,
            p.y_t + fy * dt,
            p.z_t + fz * dt,
            wrap_angle(p.theta_t + fw * dt),
        )
        self.filtered = (fx, fy, fz, fw)
        self.tick += 1
        return self.filtered

    def snapshot(self) -> SimState:
        return SimState(
            pose=self.pose,
            last_command=self.held,
            filtered=self.filtered,
            t=self.t,
            tick=self.tick,
        )
