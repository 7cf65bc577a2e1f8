"""Binary wire protocol for command/feedback streaming.

Little-endian datagrams, one message per datagram (the transport frames
messages, so a receiver can skip a whole datagram whose type it does
not know). Layout:

    magic   4 bytes  "FTLP"
    version u8       1
    type    u8       1 = velocity command, 2 = state feedback
    seq     u32      strictly increasing per sender
    t_us    u64      sender timestamp, microseconds
    payload          type-specific, see below

Velocity command payload: 4 x f32 (v_x, v_y, v_z mm/s; w_z deg/s);
total message size 34 bytes. State feedback payload: 4 x f32 pose
(x, y, z mm; theta deg) plus a flags byte (bit 0 touch, bit 1 in start
zone, bit 2 in end zone); total 35 bytes. Trailing bytes after a known
payload are tolerated for forward compatibility; short buffers are not.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAGIC = b"FTLP"
VERSION = 1
TYPE_VELOCITY_CMD = 1
TYPE_STATE_FEEDBACK = 2

_HEADER = struct.Struct("<4sBBIQ")
_VELOCITY_PAYLOAD = struct.Struct("<4f")
_FEEDBACK_PAYLOAD = struct.Struct("<4fB")

VELOCITY_CMD_SIZE = _HEADER.size + _VELOCITY_PAYLOAD.size    # 34
STATE_FEEDBACK_SIZE = _HEADER.size + _FEEDBACK_PAYLOAD.size  # 35

FLAG_TOUCH = 0x01
FLAG_IN_START = 0x02
FLAG_IN_END = 0x04


class ProtocolError(ValueError):
    """Base class for decode failures."""


class BadMagic(ProtocolError):
    pass


class BadVersion(ProtocolError):
    pass


class BadType(ProtocolError):
    pass


class Truncated(ProtocolError):
    pass


@dataclass(frozen=True)
class VelocityCmdMsg:
    seq: int
    t_us: int
    v: tuple[float, float, float, float]


@dataclass(frozen=True)
class StateFeedbackMsg:
    seq: int
    t_us: int
    pose: tuple[float, float, float, float]
    touch: bool
    in_start: bool
    in_end: bool


Message = VelocityCmdMsg | StateFeedbackMsg


def encode(msg: Message) -> bytes:
    if isinstance(msg, VelocityCmdMsg):
        head = _HEADER.pack(MAGIC, VERSION, TYPE_VELOCITY_CMD, msg.seq, msg.t_us)
        return head + _VELOCITY_PAYLOAD.pack(*msg.v)
    if isinstance(msg, StateFeedbackMsg):
        head = _HEADER.pack(MAGIC, VERSION, TYPE_STATE_FEEDBACK, msg.seq, msg.t_us)
        flags = (
            (FLAG_TOUCH if msg.touch else 0)
            | (FLAG_IN_START if msg.in_start else 0)
            | (FLAG_IN_END if msg.in_end else 0)
        )
        return head + _FEEDBACK_PAYLOAD.pack(*msg.pose, flags)
    raise TypeError(f"cannot encode {type(msg).__name__}")


def decode(data: bytes) -> Message:
    """Parse one datagram; raises a distinct error per rejection reason."""
    if len(data) < len(MAGIC):
        raise Truncated(f"buffer of {len(data)} bytes is shorter than the magic")
    if data[:4] != MAGIC:
        raise BadMagic(f"bad magic {data[:4]!r}")
    if len(data) < _HEADER.size:
        raise Truncated(f"buffer of {len(data)} bytes is shorter than the header")
    _, version, msg_type, seq, t_us = _HEADER.unpack_from(data)
    if version != VERSION:
        raise BadVersion(f"unsupported version {version}")
    if msg_type == TYPE_VELOCITY_CMD:
        if len(data) < VELOCITY_CMD_SIZE:
            raise Truncated(
                f"velocity command needs {VELOCITY_CMD_SIZE} bytes, got {len(data)}"
            )
        v = _VELOCITY_PAYLOAD.unpack_from(data, _HEADER.size)
        return VelocityCmdMsg(seq=seq, t_us=t_us, v=v)
    if msg_type == TYPE_STATE_FEEDBACK:
        if len(data) < STATE_FEEDBACK_SIZE:
            raise Truncated(
                f"state feedback needs {STATE_FEEDBACK_SIZE} bytes, got {len(data)}"
            )
        x, y, z, theta, flags = _FEEDBACK_PAYLOAD.unpack_from(data, _HEADER.size)
        return StateFeedbackMsg(
            seq=seq,
            t_us=t_us,
            pose=(x, y, z, theta),
            touch=bool(flags & FLAG_TOUCH),
            in_start=bool(flags & FLAG_IN_START),
            in_end=bool(flags & FLAG_IN_END),
        )
    raise BadType(f"unknown message type {msg_type}")
