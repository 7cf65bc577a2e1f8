"""Foot-interface teleoperation simulator and evaluation suite."""

__version__ = "0.1.0"

from .core import (
    ButtonFrame,
    ForceFrame,
    ToolPose,
    TrialTrace,
    VelocityCommand,
    wrap_angle,
)

__all__ = [
    "ButtonFrame",
    "ForceFrame",
    "ToolPose",
    "TrialTrace",
    "VelocityCommand",
    "wrap_angle",
    "__version__",
]
