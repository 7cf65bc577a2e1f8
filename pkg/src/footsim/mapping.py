"""Input-to-velocity mapping for both interfaces.

Pedal: proportional mapping of calibrated activations with a
continuous (offset-subtracting) dead zone and per-axis saturation.
Button: constant-speed axis activation; opposing simultaneous buttons
cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import CalibrationMap
from .core import (
    DEFAULT_V_MAX_TRANS,
    DEFAULT_W_MAX_ROT,
    ButtonFrame,
    ForceFrame,
    VelocityCommand,
)


@dataclass(frozen=True)
class MappingConfig:
    v_max_trans: float = DEFAULT_V_MAX_TRANS
    w_max_rot: float = DEFAULT_W_MAX_ROT
    button_speed_trans: float = DEFAULT_V_MAX_TRANS
    button_speed_rot: float = DEFAULT_W_MAX_ROT
    conflict_policy: str = "cancel"

    def __post_init__(self):
        speeds = (self.v_max_trans, self.w_max_rot, self.button_speed_trans, self.button_speed_rot)
        if any(s <= 0 for s in speeds):
            raise ValueError("all speeds must be positive")
        if self.conflict_policy != "cancel":
            raise ValueError("only the 'cancel' conflict policy is supported")

    def limits(self) -> tuple[float, float, float, float]:
        return (self.v_max_trans, self.v_max_trans, self.v_max_trans, self.w_max_rot)


def map_pedal(frame: ForceFrame, cmap: CalibrationMap, cfg: MappingConfig) -> VelocityCommand:
    """Proportional pedal mapping: u = W f, dead zone, gain, saturation.

    Velocity is zero inside the dead zone and grows continuously from it
    (the threshold is subtracted, so there is no jump at the boundary).
    """
    u = cmap.activation(frame.f)
    out = [0.0, 0.0, 0.0, 0.0]
    limits = cfg.limits()
    for i in range(4):
        mag = abs(float(u[i]))
        d = float(cmap.dead_zone[i])
        if mag <= d:
            continue
        v = float(cmap.gain[i]) * (mag - d)
        if v > limits[i]:
            v = limits[i]
        out[i] = v if u[i] > 0 else -v
    return VelocityCommand(*out)


# Button-to-axis table (0-based index = button number - 1):
# 1/2 -> -x/+x, 3/4 -> +y/-y, 5/6 -> -z/+z, 7/8 -> +theta/-theta.
_BUTTON_AXIS_SIGN = (
    (0, -1.0),
    (0, +1.0),
    (1, +1.0),
    (1, -1.0),
    (2, -1.0),
    (2, +1.0),
    (3, +1.0),
    (3, -1.0),
)


def map_buttons(frame: ButtonFrame, cfg: MappingConfig) -> VelocityCommand:
    """Constant-speed button mapping; chords sum per axis, opposers cancel."""
    out = [0.0, 0.0, 0.0, 0.0]
    for idx, pressed in enumerate(frame.b):
        if not pressed:
            continue
        axis, sign = _BUTTON_AXIS_SIGN[idx]
        speed = cfg.button_speed_rot if axis == 3 else cfg.button_speed_trans
        out[axis] += sign * speed
    return VelocityCommand.clamped(*out, v_max_trans=cfg.v_max_trans, w_max_rot=cfg.w_max_rot)
