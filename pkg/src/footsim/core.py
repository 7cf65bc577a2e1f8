"""Shared domain types and frame conventions.

Units are fixed package-wide: millimetres, degrees, seconds. The tool
frame is right-handed with z pointing up; ``theta`` is the tool rotation
about z, anticlockwise positive, always wrapped into (-180, 180].

Force channels are pre-normalised: rest reads 0 and a full push loads
the involved channels to roughly +/-1. Conversion from raw sensor units
happens upstream of this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

N_CHANNELS = 8
N_DOF = 4

DEFAULT_V_MAX_TRANS = 6.0  # mm/s, per translation axis
DEFAULT_W_MAX_ROT = 10.0   # deg/s, about z

DIRECTION_LTR = "left-to-right"
DIRECTION_RTL = "right-to-left"

ZONE_START = "start"
ZONE_FREE = "free"
ZONE_END = "end"


def wrap_angle(deg: float) -> float:
    """Wrap an angle in degrees into (-180, 180].

    Idempotent; raises ValueError on non-finite input.
    """
    deg = float(deg)
    if not math.isfinite(deg):
        raise ValueError(f"angle must be finite, got {deg!r}")
    r = math.fmod(deg, 360.0)
    if r > 180.0:
        r -= 360.0
    elif r <= -180.0:
        r += 360.0
    return r


def wrap_half_angle(deg: float) -> float:
    """Wrap an angle difference into (-90, 90], folding by 180 degrees.

    Used where an orientation is equivalent to its opposite (a ring's
    axis has no front or back face).
    """
    deg = wrap_angle(deg)
    if deg > 90.0:
        deg -= 180.0
    elif deg <= -90.0:
        deg += 180.0
    return deg


def _check_finite(name: str, values) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True, slots=True)
class ForceFrame:
    """One sample of the eight continuous pedal force channels."""

    t: float
    f: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "f", tuple(float(v) for v in self.f))
        if len(self.f) != N_CHANNELS:
            raise ValueError(f"expected {N_CHANNELS} channels, got {len(self.f)}")
        _check_finite("force channel", self.f)
        _check_finite("t", (self.t,))


@dataclass(frozen=True, slots=True)
class ButtonFrame:
    """One sample of the eight switch states. Index i is button i+1."""

    t: float
    b: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "b", tuple(bool(v) for v in self.b))
        if len(self.b) != N_CHANNELS:
            raise ValueError(f"expected {N_CHANNELS} buttons, got {len(self.b)}")
        _check_finite("t", (self.t,))


@dataclass(frozen=True, slots=True)
class VelocityCommand:
    """A 4-DOF end-effector velocity command.

    Translations in mm/s, rotation in deg/s (anticlockwise positive).
    Build commands with :meth:`clamped`, which enforces the speed limits
    without ever raising on finite input; the bare constructor only
    validates finiteness and is meant for values already within limits
    (deserialisation, internal bookkeeping).
    """

    v_x: float
    v_y: float
    v_z: float
    w_z: float

    def __post_init__(self):
        object.__setattr__(self, "v_x", float(self.v_x))
        object.__setattr__(self, "v_y", float(self.v_y))
        object.__setattr__(self, "v_z", float(self.v_z))
        object.__setattr__(self, "w_z", float(self.w_z))
        _check_finite("velocity", (self.v_x, self.v_y, self.v_z, self.w_z))

    @classmethod
    def clamped(
        cls,
        v_x: float,
        v_y: float,
        v_z: float,
        w_z: float,
        v_max_trans: float = DEFAULT_V_MAX_TRANS,
        w_max_rot: float = DEFAULT_W_MAX_ROT,
    ) -> "VelocityCommand":
        clamp = lambda v, lim: -lim if v < -lim else (lim if v > lim else v)
        return cls(
            clamp(float(v_x), v_max_trans),
            clamp(float(v_y), v_max_trans),
            clamp(float(v_z), v_max_trans),
            clamp(float(w_z), w_max_rot),
        )

    @classmethod
    def zero(cls) -> "VelocityCommand":
        return cls(0.0, 0.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.v_x, self.v_y, self.v_z, self.w_z)


@dataclass(frozen=True, slots=True)
class ToolPose:
    """End-effector pose: position in mm, theta in degrees (-180, 180]."""

    x_t: float
    y_t: float
    z_t: float
    theta_t: float

    def __post_init__(self):
        object.__setattr__(self, "x_t", float(self.x_t))
        object.__setattr__(self, "y_t", float(self.y_t))
        object.__setattr__(self, "z_t", float(self.z_t))
        _check_finite("pose", (self.x_t, self.y_t, self.z_t))
        object.__setattr__(self, "theta_t", wrap_angle(self.theta_t))

    def position(self) -> tuple[float, float, float]:
        return (self.x_t, self.y_t, self.z_t)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_t, self.y_t, self.z_t, self.theta_t)


@dataclass(frozen=True, slots=True)
class TraceSample:
    """One command-rate tick of a trial recording.

    ``input`` is the frame that produced ``raw`` (None for sessions
    driven by velocity commands directly, e.g. over UDP). ``filtered``
    is the low-pass-filtered velocity actually integrated, recorded at
    the end of the tick window; it may overshoot the command limits by
    the filter's step overshoot and is therefore a bare tuple rather
    than a VelocityCommand. ``ingested`` is False on ticks where no
    fresh command arrived (the simulator then holds or, past the
    watchdog, zeroes); replay honours it.
    """

    t: float
    input: ForceFrame | ButtonFrame | None
    raw: VelocityCommand
    filtered: tuple[float, float, float, float]
    pose: ToolPose
    touch: bool
    zone: str
    ingested: bool = True


@dataclass
class TrialTrace:
    """Timestamped record of one trial; the substrate for all metrics.

    ``samples`` run at the command rate. ``touch_flags`` is the 20 Hz
    buzzer record collected while the trial is running; error rate is
    computed from it, not from the per-sample flags.
    """

    trial_id: str
    direction: str
    sample_rate: float
    touch_rate: float = 20.0
    samples: list[TraceSample] = field(default_factory=list)
    touch_flags: list[bool] = field(default_factory=list)
    t_start: float | None = None
    t_end: float | None = None
    fault: bool = False

    def completed(self) -> bool:
        return self.t_start is not None and self.t_end is not None

    def validate(self) -> None:
        if self.direction not in (DIRECTION_LTR, DIRECTION_RTL):
            raise ValueError(f"bad direction {self.direction!r}")
        times = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("trace samples not strictly ordered in t")
        if self.completed() and self.t_end <= self.t_start:
            raise ValueError("t_end must be after t_start")
