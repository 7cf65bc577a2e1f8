"""Wire-path geometry, ring tool, touch detection and the trial machine.

A wire path is a C0-continuous chain of straight lines and circular
arcs, traversed by arc length. The tool is an ideal circle (the ring)
whose axis stays horizontal and follows the tool rotation. Touch means
the ring circle comes closer to the wire centreline than the wire
radius anywhere.

Arcs are stored as centre / plane normal / radius / start angle / sweep.
The in-plane zero-angle direction is derived canonically from the
normal: project the first world axis not parallel to it onto the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DIRECTION_LTR,
    DIRECTION_RTL,
    ZONE_END,
    ZONE_FREE,
    ZONE_START,
    ToolPose,
)

DEFAULT_WIRE_RADIUS = 1.25   # mm (2.5 mm wire diameter)
DEFAULT_RING_INNER_RADIUS = 4.0  # mm (8 mm inner diameter)
CHAIN_TOL = 1e-9             # mm, C0 continuity tolerance
TRIGGER_RADIUS = 5.0         # mm, start/end plate trigger spheres
TELEPORT_LIMIT = 50.0        # mm per update, fault guard


class GeometryError(ValueError):
    pass


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0:
        raise GeometryError("zero-length vector")
    return v / n


def plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Canonical in-plane basis (e1, e2) for a unit normal; e2 = n x e1."""
    normal = _unit(np.asarray(normal, dtype=float))
    for ref in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
        proj = ref - np.dot(ref, normal) * normal
        if np.linalg.norm(proj) > 0.1:
            e1 = _unit(proj)
            return e1, np.cross(normal, e1)
    return np.array([0.0, 0.0, 1.0]), np.cross(normal, np.array([0.0, 0.0, 1.0]))


@dataclass(frozen=True)
class Line:
    p0: tuple[float, float, float]
    p1: tuple[float, float, float]

    def __post_init__(self):
        a = np.asarray(self.p0, dtype=float)
        b = np.asarray(self.p1, dtype=float)
        length = float(np.linalg.norm(b - a))
        if length <= 0:
            raise GeometryError("degenerate line segment")
        object.__setattr__(self, "p0", tuple(a.tolist()))
        object.__setattr__(self, "p1", tuple(b.tolist()))
        object.__setattr__(self, "_start", a)
        object.__setattr__(self, "_dir", (b - a) / length)
        object.__setattr__(self, "_length", length)

    @property
    def length(self) -> float:
        return self._length

    def start(self) -> np.ndarray:
        return self._start

    def end(self) -> np.ndarray:
        return np.asarray(self.p1)

    def direction(self) -> np.ndarray:
        return self._dir

    def point(self, s: float) -> np.ndarray:
        return self._start + self._dir * s

    def tangent(self, s: float) -> np.ndarray:
        return self._dir

    def points(self, s: np.ndarray) -> np.ndarray:
        return self._start[None, :] + s[:, None] * self._dir[None, :]

    def closest(self, p: np.ndarray) -> tuple[float, float]:
        """(arc length of closest point, distance)."""
        s = float(np.clip(np.dot(p - self._start, self._dir), 0.0, self._length))
        return s, float(np.linalg.norm(p - (self._start + s * self._dir)))

    def reversed(self) -> "Line":
        return Line(self.p1, self.p0)


@dataclass(frozen=True)
class Arc:
    center: tuple[float, float, float]
    normal: tuple[float, float, float]
    radius: float
    start_angle_deg: float
    sweep_deg: float

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("arc radius must be positive")
        if self.sweep_deg == 0:
            raise GeometryError("arc sweep must be nonzero")
        c = np.asarray(self.center, dtype=float)
        n = _unit(np.asarray(self.normal, dtype=float))
        object.__setattr__(self, "center", tuple(c.tolist()))
        object.__setattr__(self, "normal", tuple(n.tolist()))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "start_angle_deg", float(self.start_angle_deg))
        object.__setattr__(self, "sweep_deg", float(self.sweep_deg))
        e1, e2 = plane_basis(n)
        object.__setattr__(self, "_e1", e1)
        object.__setattr__(self, "_e2", e2)

    @property
    def length(self) -> float:
        return self.radius * abs(math.radians(self.sweep_deg))

    def _angle_at(self, s: float) -> float:
        frac = s / self.length if self.length else 0.0
        return math.radians(self.start_angle_deg + frac * self.sweep_deg)

    def point(self, s: float) -> np.ndarray:
        a = self._angle_at(s)
        return (
            np.asarray(self.center)
            + self.radius * (math.cos(a) * self._e1 + math.sin(a) * self._e2)
        )

    def tangent(self, s: float) -> np.ndarray:
        a = self._angle_at(s)
        t = -math.sin(a) * self._e1 + math.cos(a) * self._e2
        return t if self.sweep_deg > 0 else -t

    def points(self, s: np.ndarray) -> np.ndarray:
        a = np.radians(self.start_angle_deg + (s / self.length) * self.sweep_deg)
        return (
            np.asarray(self.center)[None, :]
            + self.radius * (np.cos(a)[:, None] * self._e1 + np.sin(a)[:, None] * self._e2)
        )

    def start(self) -> np.ndarray:
        return self.point(0.0)

    def end(self) -> np.ndarray:
        return self.point(self.length)

    def closest(self, p: np.ndarray) -> tuple[float, float]:
        rel = p - np.asarray(self.center)
        x = float(np.dot(rel, self._e1))
        y = float(np.dot(rel, self._e2))
        ang = math.degrees(math.atan2(y, x))
        # Offset from the start angle, unwrapped into the sweep direction.
        off = (ang - self.start_angle_deg) % 360.0
        if self.sweep_deg < 0:
            off = off - 360.0 if off > 0 else off
        if (0 <= off <= self.sweep_deg) or (self.sweep_deg <= off <= 0):
            s = self.length * abs(off / self.sweep_deg)
            return s, float(np.linalg.norm(p - self.point(s)))
        d0 = float(np.linalg.norm(p - self.start()))
        d1 = float(np.linalg.norm(p - self.end()))
        return (0.0, d0) if d0 <= d1 else (self.length, d1)

    def reversed(self) -> "Arc":
        return Arc(
            self.center,
            self.normal,
            self.radius,
            self.start_angle_deg + self.sweep_deg,
            -self.sweep_deg,
        )


Segment = Line | Arc


class WirePath:
    """A chain of segments traversed by arc length, plus the wire radius."""

    def __init__(self, segments: list[Segment], wire_radius: float = DEFAULT_WIRE_RADIUS,
                 path_id: str = "", name: str = ""):
        if not segments:
            raise GeometryError("path needs at least one segment")
        if wire_radius <= 0:
            raise GeometryError("wire_radius must be positive")
        for a, b in zip(segments, segments[1:]):
            gap = float(np.linalg.norm(a.end() - b.start()))
            if gap > CHAIN_TOL:
                raise GeometryError(f"segment chain broken: gap of {gap:.3e} mm")
        self.segments = list(segments)
        self.wire_radius = wire_radius
        self.path_id = path_id
        self.name = name
        self._cum = np.concatenate([[0.0], np.cumsum([s.length for s in segments])])
        self._dense_cache: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def total_length(self) -> float:
        return float(self._cum[-1])

    def start_point(self) -> np.ndarray:
        return self.segments[0].start()

    def end_point(self) -> np.ndarray:
        return self.segments[-1].end()

    def _locate(self, s: float) -> tuple[Segment, float]:
        if not 0.0 <= s <= self.total_length + 1e-12:
            raise GeometryError(f"arc length {s} outside [0, {self.total_length}]")
        s = min(s, self.total_length)
        idx = int(np.searchsorted(self._cum, s, side="right")) - 1
        idx = min(max(idx, 0), len(self.segments) - 1)
        return self.segments[idx], s - float(self._cum[idx])

    def point_and_tangent(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        seg, local = self._locate(s)
        return seg.point(local), seg.tangent(local)

    def closest(self, p) -> tuple[float, float]:
        """Global closest point: (arc length, distance to centreline)."""
        p = np.asarray(p, dtype=float)
        best_s, best_d = 0.0, math.inf
        for seg, s0 in zip(self.segments, self._cum[:-1]):
            s, d = seg.closest(p)
            if d < best_d:
                best_s, best_d = float(s0) + s, d
        return best_s, best_d

    def sample_arclength(self, n: int) -> np.ndarray:
        """n points uniformly spaced in arc length over the whole path."""
        return self.points_at(np.linspace(0.0, self.total_length, n))

    def points_at(self, s: np.ndarray) -> np.ndarray:
        """Vectorised point evaluation at arbitrary arc lengths."""
        s = np.asarray(s, dtype=float)
        out = np.empty((len(s), 3))
        idx = np.clip(
            np.searchsorted(self._cum, s, side="right") - 1, 0, len(self.segments) - 1
        )
        for i in np.unique(idx):
            seg = self.segments[i]
            mask = idx == i
            out[mask] = seg.points(np.clip(s[mask] - self._cum[i], 0.0, seg.length))
        return out

    def dense_samples(self, spacing: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
        """Cached (s values, points) grid used for coarse minimisation."""
        if self._dense_cache is None:
            n = max(16, int(self.total_length / spacing) + 1)
            s = np.linspace(0.0, self.total_length, n)
            self._dense_cache = (s, self.sample_arclength(n))
        return self._dense_cache

    def reversed(self) -> "WirePath":
        return WirePath(
            [seg.reversed() for seg in reversed(self.segments)],
            wire_radius=self.wire_radius,
            path_id=self.path_id,
            name=self.name + " (reversed)" if self.name else "",
        )

    def z_extent(self) -> float:
        pts = self.sample_arclength(max(64, int(self.total_length)))
        return float(pts[:, 2].max() - pts[:, 2].min())


@dataclass(frozen=True)
class RingTool:
    """The ring on the end-effector: an ideal circle with horizontal axis."""

    pose: ToolPose
    inner_radius: float = DEFAULT_RING_INNER_RADIUS

    def center(self) -> np.ndarray:
        return np.array([self.pose.x_t, self.pose.y_t, self.pose.z_t])

    def axis(self) -> np.ndarray:
        th = math.radians(self.pose.theta_t)
        return np.array([math.cos(th), math.sin(th), 0.0])


def point_to_circle_distance(points: np.ndarray, center: np.ndarray, axis: np.ndarray,
                             radius: float) -> np.ndarray:
    """Exact distance from each point to a circle in 3D (vectorised)."""
    rel = np.atleast_2d(points) - center
    axial = rel @ axis
    radial_vec = rel - axial[:, None] * axis[None, :]
    rho = np.linalg.norm(radial_vec, axis=1)
    return np.hypot(axial, rho - radius)


def wire_ring_clearance(ring: RingTool, path: WirePath) -> float:
    """Minimum clearance between ring circle and wire surface (mm).

    Negative means the ring would touch the wire. Coarse pass over a
    cached dense grid, then iterative batched narrowing of the best
    windows down to 1e-3 mm resolution in arc length.
    """
    center = ring.center()
    axis = ring.axis()
    radius = ring.inner_radius
    s_grid, pts = path.dense_samples()
    dists = point_to_circle_distance(pts, center, axis, radius)
    spacing = s_grid[1] - s_grid[0] if len(s_grid) > 1 else path.total_length

    order = np.argsort(dists)
    windows: list[tuple[float, float]] = []
    for idx in order[:6]:
        lo = max(0.0, float(s_grid[idx]) - spacing)
        hi = min(path.total_length, float(s_grid[idx]) + spacing)
        if any(not (hi < w_lo or lo > w_hi) for w_lo, w_hi in windows):
            continue
        windows.append((lo, hi))
        if len(windows) >= 3:
            break

    best = float(dists.min())
    for lo, hi in windows:
        while hi - lo > 1e-3:
            s = np.linspace(lo, hi, 24)
            d = point_to_circle_distance(path.points_at(s), center, axis, radius)
            k = int(np.argmin(d))
            best = min(best, float(d[k]))
            lo = s[max(0, k - 1)]
            hi = s[min(len(s) - 1, k + 1)]
    return best - path.wire_radius


def detect_touch(ring: RingTool, path: WirePath) -> bool:
    return wire_ring_clearance(ring, path) < 0.0


# --- trial state machine ----------------------------------------------------

PHASE_IDLE = "idle"
PHASE_ARMED = "armed"
PHASE_RUNNING = "running"
PHASE_DONE = "done"


def zone_of(pose: ToolPose, start_center: np.ndarray, end_center: np.ndarray,
            radius: float = TRIGGER_RADIUS) -> str:
    p = np.array([pose.x_t, pose.y_t, pose.z_t])
    if np.linalg.norm(p - start_center) <= radius:
        return ZONE_START
    if np.linalg.norm(p - end_center) <= radius:
        return ZONE_END
    return ZONE_FREE


class TrialRunner:
    """Phase progression and 20 Hz touch recording for one trial.

    Phases only move forward: armed -> running on leaving the start
    trigger sphere, running -> done on entering the end sphere.
    Re-entering the start zone mid-trial does not restart. A pose jump
    over 50 mm between updates raises the fault flag.
    """

    def __init__(self, path: WirePath, direction: str = DIRECTION_LTR,
                 trigger_radius: float = TRIGGER_RADIUS):
        if direction not in (DIRECTION_LTR, DIRECTION_RTL):
            raise ValueError(f"bad direction {direction!r}")
        self.path = path
        self.direction = direction
        self.trigger_radius = trigger_radius
        if direction == DIRECTION_LTR:
            self.start_center = path.start_point()
            self.end_center = path.end_point()
        else:
            self.start_center = path.end_point()
            self.end_center = path.start_point()
        self.phase = PHASE_ARMED
        self.t_start: float | None = None
        self.t_end: float | None = None
        self.touch_flags: list[bool] = []
        self.fault = False
        self._prev: np.ndarray | None = None

    def zone(self, pose: ToolPose) -> str:
        return zone_of(pose, self.start_center, self.end_center, self.trigger_radius)

    def update(self, pose: ToolPose, t: float) -> str:
        """Advance the phase machine; returns the current zone."""
        p = np.array([pose.x_t, pose.y_t, pose.z_t])
        if self._prev is not None and np.linalg.norm(p - self._prev) > TELEPORT_LIMIT:
            self.fault = True
        self._prev = p
        zone = self.zone(pose)
        if self.phase == PHASE_ARMED and zone != ZONE_START:
            self.phase = PHASE_RUNNING
            self.t_start = t
        elif self.phase == PHASE_RUNNING and zone == ZONE_END:
            self.phase = PHASE_DONE
            self.t_end = t
        return zone

    def record_touch(self, touching: bool) -> None:
        """Append one 20 Hz buzzer sample; only meaningful while running."""
        if self.phase == PHASE_RUNNING:
            self.touch_flags.append(bool(touching))

    def completed(self) -> bool:
        return self.phase == PHASE_DONE
