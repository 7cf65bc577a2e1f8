"""JSONL session logs and deterministic replay.

A session log fully determines a trial: a header line captures the
configuration, course, direction and calibration map (with checksum),
then one line per command tick records the input frame, raw command,
filtered velocity, pose and buzzer state, and a final line carries the
trial events. Replaying the logged inputs through a fresh engine must
reproduce every pose bit for bit; any divergence or corruption is an
error that names the offending line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .calibration import CalibrationMap
from .core import (
    ButtonFrame,
    ForceFrame,
    TraceSample,
    TrialTrace,
    VelocityCommand,
)
from .engine import Engine
from .mapping import MappingConfig, map_buttons, map_pedal
from .metrics import MetricsReport, SmoothnessConfig, compute_metrics
from .paths import get_path
from .robot import SimConfig

FORMAT = "footsim.session.v1"

INPUT_FORCE = "force"
INPUT_BUTTON = "button"


class SessionLogError(ValueError):
    pass


def _frame_to_dict(frame) -> dict | None:
    if frame is None:
        return None
    if isinstance(frame, ForceFrame):
        return {"kind": INPUT_FORCE, "t": frame.t, "f": list(frame.f)}
    if isinstance(frame, ButtonFrame):
        return {"kind": INPUT_BUTTON, "t": frame.t, "b": list(frame.b)}
    raise TypeError(f"unknown input frame {type(frame).__name__}")


def _frame_from_dict(d: dict | None):
    if d is None:
        return None
    if d["kind"] == INPUT_FORCE:
        return ForceFrame(d["t"], tuple(d["f"]))
    if d["kind"] == INPUT_BUTTON:
        return ButtonFrame(d["t"], tuple(d["b"]))
    raise SessionLogError(f"unknown input kind {d['kind']!r}")


@dataclass
class SessionHeader:
    path_id: str
    direction: str
    interface: str
    trial_id: str
    sim: SimConfig
    mapping: MappingConfig
    cmap: CalibrationMap | None
    map_checksum: str | None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": "header",
            "format": FORMAT,
            "path_id": self.path_id,
            "direction": self.direction,
            "interface": self.interface,
            "trial_id": self.trial_id,
            "sim": self.sim.to_dict(),
            "mapping": {
                "v_max_trans": self.mapping.v_max_trans,
                "w_max_rot": self.mapping.w_max_rot,
                "button_speed_trans": self.mapping.button_speed_trans,
                "button_speed_rot": self.mapping.button_speed_rot,
                "conflict_policy": self.mapping.conflict_policy,
            },
            "map": self.cmap.to_dict() if self.cmap else None,
            "map_checksum": self.map_checksum,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionHeader":
        if d.get("format") != FORMAT:
            raise SessionLogError(f"unsupported log format {d.get('format')!r}")
        cmap = CalibrationMap.from_dict(d["map"]) if d.get("map") else None
        stored = d.get("map_checksum")
        if cmap is not None and stored is not None and cmap.checksum() != stored:
            raise SessionLogError(
                "calibration map checksum mismatch: header says "
                f"{stored[:12]}..., map hashes to {cmap.checksum()[:12]}..."
            )
        return cls(
            path_id=d["path_id"],
            direction=d["direction"],
            interface=d["interface"],
            trial_id=d["trial_id"],
            sim=SimConfig.from_dict(d["sim"]),
            mapping=MappingConfig(**d["mapping"]),
            cmap=cmap,
            map_checksum=stored,
            seed=d.get("seed"),
        )


def sample_to_record(s: TraceSample) -> dict:
    record = {
        "kind": "sample",
        "t": s.t,
        "input": _frame_to_dict(s.input),
        "raw": list(s.raw.as_tuple()),
        "filtered": list(s.filtered),
        "pose": list(s.pose.as_tuple()),
        "touch": s.touch,
        "zone": s.zone,
    }
    if not s.ingested:
        record["ingested"] = False
    return record


class SessionWriter:
    """Append-only JSONL writer; one file per trial."""

    def __init__(self, path, header: SessionHeader):
        self.path = Path(path)
        self._fh = open(self.path, "w", encoding="utf-8")
        self._write(header.to_dict())

    def _write(self, record: dict) -> None:
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    def write_sample(self, sample: TraceSample) -> None:
        self._write(sample_to_record(sample))

    def finish(self, trace: TrialTrace) -> None:
        self._write(
            {
                "kind": "trial_end",
                "t_start": trace.t_start,
                "t_end": trace.t_end,
                "fault": trace.fault,
                "touch_flags": [bool(b) for b in trace.touch_flags],
            }
        )
        self._fh.close()

    def abort(self) -> None:
        if not self._fh.closed:
            self._fh.close()


@dataclass
class SessionLog:
    header: SessionHeader
    samples: list[dict]
    trial_end: dict | None


def read_session(path) -> SessionLog:
    header = None
    samples: list[dict] = []
    trial_end = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SessionLogError(f"{path}: line {lineno}: invalid JSON ({exc.msg})")
            kind = record.get("kind")
            try:
                if kind == "header":
                    header = SessionHeader.from_dict(record)
                elif kind == "sample":
                    samples.append(record)
                elif kind == "trial_end":
                    trial_end = record
                else:
                    raise SessionLogError(f"unknown record kind {kind!r}")
            except (KeyError, TypeError, ValueError) as exc:
                raise SessionLogError(f"{path}: line {lineno}: {exc}") from exc
    if header is None:
        raise SessionLogError(f"{path}: missing header record")
    if not samples:
        raise SessionLogError(f"{path}: no samples")
    return SessionLog(header=header, samples=samples, trial_end=trial_end)


def replay(
    log: SessionLog, smoothness: SmoothnessConfig | None = None, strict: bool = True
) -> tuple[MetricsReport, TrialTrace]:
    """Re-run the logged inputs; verify poses and commands bit for bit.

    Returns the recomputed metrics and trace. With ``strict`` the replay
    raises on the first divergence from the log (by sample number).
    """
    header = log.header
    path = get_path(header.path_id)
    engine = Engine(
        path,
        header.direction,
        trial_id=header.trial_id,
        sim_cfg=header.sim,
    )
    for n, record in enumerate(log.samples, start=1):
        frame = _frame_from_dict(record.get("input"))
        ingested = record.get("ingested", True)
        if frame is None:
            raw = VelocityCommand(*record["raw"])
        elif isinstance(frame, ForceFrame):
            if header.cmap is None:
                raise SessionLogError("log has force input but no calibration map")
            raw = map_pedal(frame, header.cmap, header.mapping)
        else:
            raw = map_buttons(frame, header.mapping)
        sample = engine.command_tick(frame, raw, ingested=ingested)
        if strict:
            if ingested and list(raw.as_tuple()) != record["raw"]:
                raise SessionLogError(
                    f"sample {n}: raw command diverged: {list(raw.as_tuple())} "
                    f"vs logged {record['raw']}"
                )
            if list(sample.pose.as_tuple()) != record["pose"]:
                raise SessionLogError(
                    f"sample {n}: pose diverged: {list(sample.pose.as_tuple())} "
                    f"vs logged {record['pose']}"
                )
    if log.trial_end is not None and strict:
        if engine.trace.t_start != log.trial_end["t_start"] or engine.trace.t_end != log.trial_end["t_end"]:
            raise SessionLogError(
                "trial events diverged: "
                f"({engine.trace.t_start}, {engine.trace.t_end}) vs logged "
                f"({log.trial_end['t_start']}, {log.trial_end['t_end']})"
            )
    report = compute_metrics(engine.trace, smoothness)
    return report, engine.trace
