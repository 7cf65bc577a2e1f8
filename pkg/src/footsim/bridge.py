"""Real-time UDP command/feedback server.

The simulator side acts as the server: it accepts velocity-command
datagrams (newest sequence wins, stale ones are dropped), ticks the
session at the command rate on a wall clock, and streams state feedback
back to the most recent sender. Malformed datagrams are counted and
dropped, never fatal. Command silence longer than the simulator
watchdog freezes the end effector via the zeroed command.
"""

from __future__ import annotations

import asyncio
import time
from dataclasses import dataclass

from .core import VelocityCommand
from .live import LiveSession
from .protocol import (
    ProtocolError,
    StateFeedbackMsg,
    VelocityCmdMsg,
    decode,
    encode,
)


@dataclass
class BridgeStats:
    received: int = 0
    malformed: int = 0
    stale: int = 0
    sent: int = 0


class UdpRobotServer(asyncio.DatagramProtocol):
    """Datagram endpoint feeding a LiveSession in velocity mode."""

    def __init__(self, session: LiveSession, rate: float = 30.0):
        if session.interface != "velocity":
            raise ValueError("UDP bridge drives a velocity-interface session")
        self.session = session
        self.rate = rate
        self.stats = BridgeStats()
        self.transport: asyncio.DatagramTransport | None = None
        self.peer = None
        self._max_seq = -1
        self._ticker: asyncio.Task | None = None

    # -- datagram side -------------------------------------------------------

    def connection_made(self, transport) -> None:
        self.transport = transport
        self._ticker = asyncio.get_running_loop().create_task(self._tick_loop())

    def connection_lost(self, exc) -> None:
        if self._ticker is not None:
            self._ticker.cancel()

    def datagram_received(self, data: bytes, addr) -> None:
        self.stats.received += 1
        try:
            msg = decode(data)
        except ProtocolError:
            self.stats.malformed += 1
            return
        if not isinstance(msg, VelocityCmdMsg):
            self.stats.malformed += 1
            return
        if msg.seq <= self._max_seq:
            self.stats.stale += 1
            return
        self._max_seq = msg.seq
        self.peer = addr
        self.session.submit_command(
            VelocityCommand.clamped(
                *msg.v,
                v_max_trans=self.session.mapping.v_max_trans,
                w_max_rot=self.session.mapping.w_max_rot,
            )
        )

    # -- feedback side -------------------------------------------------------

    async def _tick_loop(self) -> None:
        period = 1.0 / self.rate
        next_t = time.monotonic()
        while not self.session.finished:
            next_t += period
            state = self.session.tick()
            if self.peer is not None and self.transport is not None:
                fb = StateFeedbackMsg(
                    seq=state["seq"],
                    t_us=int(state["t"] * 1e6),
                    pose=tuple(state["pose"]),
                    touch=state["touch"],
                    in_start=state["zone"] == "start",
                    in_end=state["zone"] == "end",
                )
                self.transport.sendto(encode(fb), self.peer)
                self.stats.sent += 1
            delay = next_t - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_t = time.monotonic()


async def serve_udp(
    session: LiveSession, host: str = "127.0.0.1", port: int = 9870, rate: float = 30.0
) -> tuple[asyncio.DatagramTransport, UdpRobotServer]:
    """Bind the UDP robot server; returns (transport, protocol)."""
    loop = asyncio.get_running_loop()
    transport, server = await loop.create_datagram_endpoint(
        lambda: UdpRobotServer(session, rate), local_addr=(host, port)
    )
    return transport, server
