"""Built-in wire courses and the path file format.

Three courses ship with the package, sized like bench-top training
wires (300-500 mm of arc length):

* wire1, flat course: horizontal polyline with axis-aligned and
  diagonal legs; filleted corners turning 45, 75, 90 and 120 degrees.
* wire2, ramp course: adds a half-circle sweep (so the ring rotation
  must track the tangent) and two 10 mm z ramps.
* wire3, test course: a different arrangement of the same features,
  corners at 60, 90 and 135 degrees.

Exact coordinates are shipped as versioned ``.path`` files under
``footsim/data/paths`` so results stay comparable across runs; the
builder here is their generator and the loader refuses broken chains.

File grammar (one record per line, '#' starts a comment)::

    version 1
    id <token>
    name <free text>
    wire_radius <mm>
    line <x0> <y0> <z0> <x1> <y1> <z1>
    arc <cx> <cy> <cz> <nx> <ny> <nz> <radius> <start_deg> <sweep_deg>
"""

from __future__ import annotations

import math
from importlib import resources

import numpy as np

from .task import Arc, GeometryError, Line, Segment, WirePath, DEFAULT_WIRE_RADIUS


class PathBuilder:
    """Turtle-style builder: straight legs and tangent-continuous turns."""

    def __init__(self, start=(0.0, 0.0, 0.0), azimuth_deg: float = 0.0):
        self.pos = np.asarray(start, dtype=float)
        self.az = float(azimuth_deg)
        self.segments: list[Segment] = []

    def _heading(self) -> np.ndarray:
        a = math.radians(self.az)
        return np.array([math.cos(a), math.sin(a), 0.0])

    def leg(self, run: float, dz: float = 0.0) -> "PathBuilder":
        """Straight segment: ``run`` mm horizontally along the heading,
        optionally climbing ``dz`` mm."""
        end = self.pos + self._heading() * run + np.array([0.0, 0.0, dz])
        self.segments.append(Line(tuple(self.pos), tuple(end)))
        self.pos = end
        return self

    def turn(self, delta_deg: float, radius: float) -> "PathBuilder":
        """Horizontal fillet arc turning the heading by delta (+ is left)."""
        if delta_deg == 0 or radius <= 0:
            raise GeometryError("turn needs a nonzero angle and positive radius")
        left = delta_deg > 0
        side = 90.0 if left else -90.0
        to_center = math.radians(self.az + side)
        center = self.pos + radius * np.array(
            [math.cos(to_center), math.sin(to_center), 0.0]
        )
        start_angle = self.az - side
        arc = Arc(tuple(center), (0.0, 0.0, 1.0), radius, start_angle, delta_deg)
        self.segments.append(arc)
        self.pos = arc.end()
        self.az += delta_deg
        return self

    def build(self, path_id: str, name: str, wire_radius: float = DEFAULT_WIRE_RADIUS) -> WirePath:
        return WirePath(self.segments, wire_radius=wire_radius, path_id=path_id, name=name)


def build_wire1() -> WirePath:
    b = PathBuilder()
    b.leg(60).turn(90, 15).leg(50).turn(-45, 15).leg(70)
    b.turn(-120, 15).leg(55).turn(75, 15).leg(60)
    return b.build("wire1", "flat course")


def build_wire2() -> WirePath:
    b = PathBuilder()
    b.leg(45).turn(90, 15).leg(40, dz=10.0).turn(-45, 15).leg(30)
    b.turn(-180, 45).leg(30).turn(120, 15).leg(40, dz=-10.0).leg(25)
    return b.build("wire2", "ramp course")


def build_wire3() -> WirePath:
    b = PathBuilder()
    b.leg(40).turn(-60, 15).leg(35).turn(90, 18).leg(40, dz=10.0)
    b.turn(135, 12).leg(30).turn(180, 45).leg(40, dz=-10.0).leg(30)
    return b.build("wire3", "test course")


_BUILDERS = {"wire1": build_wire1, "wire2": build_wire2, "wire3": build_wire3}
PATH_IDS = tuple(_BUILDERS)

_cache: dict[str, WirePath] = {}


def builtin_paths() -> tuple[WirePath, WirePath, WirePath]:
    """The three shipped courses, loaded from the versioned path files."""
    return tuple(get_path(pid) for pid in PATH_IDS)


def get_path(path_id: str) -> WirePath:
    if path_id not in _BUILDERS:
        raise GeometryError(f"unknown path id {path_id!r}; have {', '.join(PATH_IDS)}")
    if path_id not in _cache:
        ref = resources.files("footsim").joinpath(f"data/paths/{path_id}.path")
        _cache[path_id] = parse_path(ref.read_text(encoding="utf-8"), source=str(ref))
    return _cache[path_id]


def dump_path(path: WirePath) -> str:
    lines = [
        "# footsim wire path",
        "version 1",
        f"id {path.path_id}",
        f"name {path.name}",
        f"wire_radius {path.wire_radius!r}",
    ]
    for seg in path.segments:
        if isinstance(seg, Line):
            coords = [*seg.p0, *seg.p1]
            lines.append("line " + " ".join(repr(c) for c in coords))
        else:
            coords = [*seg.center, *seg.normal, seg.radius, seg.start_angle_deg, seg.sweep_deg]
            lines.append("arc " + " ".join(repr(c) for c in coords))
    return "\n".join(lines) + "\n"


def parse_path(text: str, source: str = "<string>") -> WirePath:
    version = None
    path_id = ""
    name = ""
    wire_radius = DEFAULT_WIRE_RADIUS
    segments: list[Segment] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, rest = line.partition(" ")
        try:
            if kind == "version":
                version = int(rest)
            elif kind == "id":
                path_id = rest.strip()
            elif kind == "name":
                name = rest.strip()
            elif kind == "wire_radius":
                wire_radius = float(rest)
            elif kind == "line":
                v = [float(x) for x in rest.split()]
                if len(v) != 6:
                    raise ValueError("line record needs 6 numbers")
                segments.append(Line(tuple(v[:3]), tuple(v[3:])))
            elif kind == "arc":
                v = [float(x) for x in rest.split()]
                if len(v) != 9:
                    raise ValueError("arc record needs 9 numbers")
                segments.append(Arc(tuple(v[:3]), tuple(v[3:6]), v[6], v[7], v[8]))
            else:
                raise ValueError(f"unknown record {kind!r}")
        except (ValueError, GeometryError) as exc:
            raise GeometryError(f"{source}: line {lineno}: {exc}") from exc
    if version != 1:
        raise GeometryError(f"{source}: unsupported or missing version {version!r}")
    if not segments:
        raise GeometryError(f"{source}: no segments")
    return WirePath(segments, wire_radius=wire_radius, path_id=path_id, name=name)


def load_path_file(fp) -> WirePath:
    with open(fp, "r", encoding="utf-8") as fh:
        return parse_path(fh.read(), source=str(fp))


def write_builtin_files(directory) -> None:
    """Regenerate the shipped .path files from the builders."""
    from pathlib import Path

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for pid, builder in _BUILDERS.items():
        (directory / f"{pid}.path").write_text(dump_path(builder()))
