"""Headless experiment orchestration.

An experiment runs a block of trials for one interface on one course,
alternating travel direction (odd-numbered trials run left to right),
with all randomness drawn from one master seed. Each trial produces a
session log and a metrics report; blocks of six or more trials also get
a first-vs-last-three learning summary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .calibration import CalibrationMap
from .core import DIRECTION_LTR, DIRECTION_RTL, TrialTrace
from .engine import Engine
from .mapping import MappingConfig, map_buttons, map_pedal
from .metrics import (
    LearningEntry,
    MetricsReport,
    SmoothnessConfig,
    compute_metrics,
    learning_summary,
)
from .operators import (
    ButtonOperator,
    ButtonOperatorConfig,
    PedalOperator,
    PedalOperatorConfig,
)
from .paths import get_path
from .robot import SimConfig
from .synthetic import SyntheticSubject

INTERFACE_PEDAL = "pedal"
INTERFACE_BUTTON = "button"

#: Hard ceiling on simulated seconds per trial before it is abandoned.
TRIAL_TIMEOUT_S = 400.0


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    interface: str
    path_id: str
    trials: int = 10
    seed: int = 1
    sim: SimConfig = field(default_factory=SimConfig)
    mapping: MappingConfig = field(default_factory=MappingConfig)
    pedal_cfg: PedalOperatorConfig = field(default_factory=PedalOperatorConfig)
    button_cfg: ButtonOperatorConfig = field(default_factory=ButtonOperatorConfig)
    smoothness: SmoothnessConfig = field(default_factory=SmoothnessConfig)
    calibration_noise: float = 0.01

    def __post_init__(self):
        if self.interface not in (INTERFACE_PEDAL, INTERFACE_BUTTON):
            raise ExperimentError(f"interface must be pedal or button, got {self.interface!r}")
        if self.trials < 1:
            raise ExperimentError("trials must be at least 1")

    def describe(self) -> dict:
        return {
            "interface": self.interface,
            "path_id": self.path_id,
            "trials": self.trials,
            "seed": self.seed,
        }


def trial_direction(k: int) -> str:
    """Direction for 1-based trial number k: odd trials run left to right."""
    return DIRECTION_LTR if k % 2 == 1 else DIRECTION_RTL


@dataclass
class TrialResult:
    trace: TrialTrace
    metrics: MetricsReport | None
    completed: bool


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    subject: SyntheticSubject | None
    cmap: CalibrationMap | None
    trials: list[TrialResult]
    learning: dict[str, LearningEntry] | None

    def reports(self) -> list[MetricsReport]:
        return [t.metrics for t in self.trials if t.metrics is not None]

    def all_completed(self) -> bool:
        return all(t.completed for t in self.trials)


def _make_operator(spec: ExperimentSpec, path, direction, trial_seed: int,
                   subject, cmap):
    if spec.interface == INTERFACE_PEDAL:
        return PedalOperator(
            spec.pedal_cfg, subject, cmap, spec.mapping, path, direction,
            command_rate=spec.sim.command_rate, seed=trial_seed,
        )
    return ButtonOperator(
        spec.button_cfg, spec.mapping, path, direction,
        command_rate=spec.sim.command_rate, seed=trial_seed,
    )


def run_trial(
    spec: ExperimentSpec, trial_no: int, subject, cmap, log_path=None
) -> TrialResult:
    from .session import SessionHeader, SessionWriter

    path = get_path(spec.path_id)
    direction = trial_direction(trial_no)
    trial_seed = spec.seed * 10_000 + trial_no
    operator = _make_operator(spec, path, direction, trial_seed, subject, cmap)
    trial_id = f"{spec.interface}-{spec.path_id}-{trial_no:02d}"
    engine = Engine(path, direction, trial_id=trial_id, sim_cfg=spec.sim)
    writer = None
    if log_path is not None:
        header = SessionHeader(
            path_id=spec.path_id,
            direction=direction,
            interface=spec.interface,
            trial_id=trial_id,
            sim=spec.sim,
            mapping=spec.mapping,
            cmap=cmap,
            map_checksum=cmap.checksum() if cmap else None,
            seed=trial_seed,
        )
        writer = SessionWriter(log_path, header)
    try:
        max_ticks = int(TRIAL_TIMEOUT_S * spec.sim.command_rate)
        for _ in range(max_ticks):
            frame = operator.step(engine.t, engine.sim.pose)
            if spec.interface == INTERFACE_PEDAL:
                raw = map_pedal(frame, cmap, spec.mapping)
            else:
                raw = map_buttons(frame, spec.mapping)
            sample = engine.command_tick(frame, raw)
            if writer is not None:
                writer.write_sample(sample)
            if engine.done():
                break
    finally:
        if writer is not None:
            writer.finish(engine.trace)
    completed = engine.done()
    metrics = compute_metrics(engine.trace, spec.smoothness) if completed else None
    return TrialResult(trace=engine.trace, metrics=metrics, completed=completed)


def run_experiment(spec: ExperimentSpec, out_dir=None) -> ExperimentResult:
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    subject = cmap = None
    if spec.interface == INTERFACE_PEDAL:
        subject = SyntheticSubject.create(spec.seed)
        cmap = subject.calibrated_map(
            v_max=(
                spec.mapping.v_max_trans,
                spec.mapping.v_max_trans,
                spec.mapping.v_max_trans,
                spec.mapping.w_max_rot,
            ),
            noise_sigma=spec.calibration_noise,
        )
    trials = []
    for k in range(1, spec.trials + 1):
        log_path = out / f"trial_{k:02d}.jsonl" if out is not None else None
        trials.append(run_trial(spec, k, subject, cmap, log_path=log_path))
    reports = [t.metrics for t in trials if t.metrics is not None]
    learning = None
    if len(reports) >= 6 and len(reports) == len(trials):
        learning = learning_summary(reports)
    result = ExperimentResult(
        spec=spec, subject=subject, cmap=cmap, trials=trials, learning=learning
    )
    if out is not None:
        (out / "report.json").write_text(
            json.dumps(result_to_dict(result), indent=2) + "\n"
        )
        (out / "report.txt").write_text(format_result_table(result) + "\n")
    return result


def result_to_dict(result: ExperimentResult) -> dict:
    body = {
        "spec": result.spec.describe(),
        "map_checksum": result.cmap.checksum() if result.cmap else None,
        "trials": [
            {
                "trial_id": t.trace.trial_id,
                "direction": t.trace.direction,
                "completed": t.completed,
                "fault": t.trace.fault,
                "metrics": t.metrics.to_dict() if t.metrics else None,
            }
            for t in result.trials
        ],
    }
    if result.learning is not None:
        body["learning"] = {
            name: {
                "first3": e.first3,
                "last3": e.last3,
                "reduction_pct": e.reduction_pct,
            }
            for name, e in result.learning.items()
        }
    return body


def format_result_table(result: ExperimentResult) -> str:
    lines = [
        f"experiment: {result.spec.interface} on {result.spec.path_id}, "
        f"{result.spec.trials} trials, seed {result.spec.seed}",
        f"{'trial':<24}{'dir':<16}{'time s':>9}{'err %':>8}{'|sal_t|':>9}{'|sal_r|':>9}",
    ]
    for t in result.trials:
        if t.metrics is None:
            lines.append(f"{t.trace.trial_id:<24}{t.trace.direction:<16}{'timeout':>9}")
            continue
        m = t.metrics
        rot = f"{m.jerk_rot:9.3f}" if m.jerk_rot is not None else f"{'-':>9}"
        lines.append(
            f"{m.trial_id:<24}{t.trace.direction:<16}{m.completion_time:9.2f}"
            f"{m.error_rate:8.2f}{m.jerk_trans:9.3f}{rot}"
        )
    if result.learning:
        lines.append("learning (first3 -> last3, reduction):")
        for name, e in result.learning.items():
            lines.append(
                f"  {name:<16}{e.first3:9.3f} -> {e.last3:9.3f}  ({e.reduction_pct:+.1f}%)"
            )
    return "\n".join(lines)
