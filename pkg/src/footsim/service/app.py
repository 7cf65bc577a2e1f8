"""FastAPI service wrapping the core package.

REST endpoints expose the courses, calibration, headless experiments
and log replay; the WebSocket endpoint runs interactive sessions. In
lockstep mode (used by tests and scripted clients) every input message
advances exactly one command tick and returns one state message, which
keeps interactive runs as deterministic as headless ones. Live mode
ticks on the server wall clock with the latest input, for browsers.
"""

from __future__ import annotations

import asyncio
import json
import tempfile
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..calibration import (
    CalibrationDataset,
    CalibrationError,
    CalibrationMap,
    CalibrationSegment,
    DirectionLabel,
    IcaConfig,
    derive_deadzones_gains,
    solve_ica,
    validate_dataset,
)
from ..core import ButtonFrame, ForceFrame
from ..experiment import ExperimentError, ExperimentSpec, run_experiment, result_to_dict
from ..live import LiveSession, LiveSessionError
from ..metrics import MetricsError
from ..paths import PATH_IDS, get_path
from ..session import SessionLogError, read_session, replay
from ..synthetic import SyntheticSubject
from ..task import DEFAULT_RING_INNER_RADIUS, GeometryError
from . import schemas


def _dataset_from_schema(body: schemas.DatasetIn) -> CalibrationDataset:
    segments: list[CalibrationSegment] = []
    cur_label: DirectionLabel | None = None
    cur_t: list[float] = []
    cur_f: list[list[float]] = []

    def flush():
        nonlocal cur_label, cur_t, cur_f
        if cur_label is not None and cur_t:
            segments.append(CalibrationSegment(cur_label, np.array(cur_t), np.array(cur_f)))
        cur_label, cur_t, cur_f = None, [], []

    for s in body.samples:
        if s.label is None:
            flush()
            continue
        label = DirectionLabel(s.label)
        if label is not cur_label:
            flush()
            cur_label = label
        cur_t.append(s.t)
        cur_f.append(list(s.f))
    flush()
    if not segments:
        raise CalibrationError("dataset has no labelled samples")
    steps = np.concatenate([np.diff(seg.t) for seg in segments if len(seg.t) > 1])
    if steps.size == 0:
        raise CalibrationError("segments too short to infer sample rate")
    return CalibrationDataset(segments=segments, sample_rate=1.0 / float(np.median(steps)))


def _dataset_to_schema(ds: CalibrationDataset) -> schemas.DatasetIn:
    samples = []
    for seg in ds.segments:
        for t, f in zip(seg.t, seg.f):
            samples.append(
                schemas.DatasetSampleIn(t=float(t), label=seg.label.value, f=[float(v) for v in f])
            )
        samples.append(
            schemas.DatasetSampleIn(t=float(seg.t[-1]) + 1.0 / ds.sample_rate, label=None, f=[0.0] * 8)
        )
    return schemas.DatasetIn(samples=samples)


def create_app(sessions_dir=None, static_dir=None) -> FastAPI:
    app = FastAPI(title="footsim service", version=__version__)
    app.state.sessions_dir = Path(sessions_dir or tempfile.mkdtemp(prefix="footsim-sessions-"))
    app.state.sessions_dir.mkdir(parents=True, exist_ok=True)

    @app.get("/api/health", response_model=schemas.HealthOut)
    def health():
        return schemas.HealthOut(status="ok", version=__version__)

    @app.get("/api/paths", response_model=list[schemas.PathInfo])
    def list_paths():
        out = []
        for pid in PATH_IDS:
            p = get_path(pid)
            out.append(
                schemas.PathInfo(
                    id=p.path_id,
                    name=p.name,
                    length_mm=p.total_length,
                    z_extent_mm=p.z_extent(),
                    n_segments=len(p.segments),
                    wire_radius_mm=p.wire_radius,
                )
            )
        return out

    @app.get("/api/paths/{path_id}", response_model=schemas.PathDetail)
    def path_detail(path_id: str):
        try:
            p = get_path(path_id)
        except GeometryError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        polyline = p.sample_arclength(max(64, int(p.total_length / 2.0)))
        return schemas.PathDetail(
            id=p.path_id,
            name=p.name,
            length_mm=p.total_length,
            z_extent_mm=p.z_extent(),
            n_segments=len(p.segments),
            wire_radius_mm=p.wire_radius,
            ring_inner_radius_mm=DEFAULT_RING_INNER_RADIUS,
            start=[float(v) for v in p.start_point()],
            end=[float(v) for v in p.end_point()],
            polyline=[[float(v) for v in row] for row in polyline],
        )

    @app.post("/api/calibration/validate", response_model=schemas.ValidationReportOut)
    def calibration_validate(body: schemas.DatasetIn):
        try:
            report = validate_dataset(_dataset_from_schema(body))
        except CalibrationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.ValidationReportOut(
            complete=report.complete,
            counts=report.counts,
            missing=report.missing,
            short_hold=report.short_hold,
            summary=report.summary(),
        )

    @app.post("/api/calibration/solve", response_model=schemas.SolveResponse)
    def calibration_solve(body: schemas.SolveRequest):
        try:
            ds = _dataset_from_schema(body.dataset)
            cmap = solve_ica(ds, IcaConfig(rng_seed=body.rng_seed))
            cmap = derive_deadzones_gains(ds, cmap, tuple(body.v_max))
        except CalibrationError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return schemas.SolveResponse(
            map=schemas.MapOut(**cmap.to_dict(), checksum=cmap.checksum()),
            quality=schemas.SolveQualityOut(
                iterations=cmap.info.get("iterations", 0),
                axis_correlation=cmap.info.get("axis_correlation", []),
            ),
        )

    @app.post("/api/calibration/synthetic", response_model=schemas.SyntheticResponse)
    def calibration_synthetic(body: schemas.SyntheticRequest):
        subject = SyntheticSubject.create(body.seed)
        ds = subject.dataset(noise_sigma=body.noise_sigma)
        return schemas.SyntheticResponse(
            dataset=_dataset_to_schema(ds),
            mixing=[[float(v) for v in row] for row in subject.mixing],
        )

    @app.post("/api/experiments", response_model=schemas.ExperimentResponse)
    def experiments(body: schemas.ExperimentRequest):
        try:
            spec = ExperimentSpec(
                interface=body.interface,
                path_id=body.path_id,
                trials=body.trials,
                seed=body.seed,
            )
            get_path(spec.path_id)
        except (ExperimentError, GeometryError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        out_dir = app.state.sessions_dir / f"experiment-{body.interface}-{body.path_id}-{int(time.time()*1000)}"
        result = run_experiment(spec, out_dir=out_dir)
        d = result_to_dict(result)
        return schemas.ExperimentResponse(
            spec=d["spec"],
            trials=[
                schemas.ExperimentTrialOut(
                    trial_id=t["trial_id"],
                    direction=t["direction"],
                    completed=t["completed"],
                    metrics=schemas.TrialMetricsOut(**t["metrics"]) if t["metrics"] else None,
                )
                for t in d["trials"]
            ],
            learning={
                k: schemas.LearningEntryOut(**v) for k, v in d.get("learning", {}).items()
            }
            or None,
        )

    @app.post("/api/replay", response_model=schemas.ReplayResponse)
    def replay_log(body: schemas.ReplayRequest):
        with tempfile.NamedTemporaryFile(
            "w", suffix=".jsonl", delete=False, encoding="utf-8"
        ) as fh:
            fh.write(body.jsonl)
            tmp = fh.name
        try:
            log = read_session(tmp)
            report, trace = replay(log)
        except (SessionLogError, MetricsError, GeometryError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        finally:
            Path(tmp).unlink(missing_ok=True)
        return schemas.ReplayResponse(
            metrics=schemas.TrialMetricsOut(**report.to_dict()), samples=len(trace.samples)
        )

    @app.websocket("/ws/session")
    async def ws_session(
        websocket: WebSocket,
        interface: str = Query(...),
        path: str = Query("wire1"),
        mode: str = Query("live"),
        trials: int = Query(10, ge=1, le=100),
        rate: float = Query(30.0),
    ):
        await websocket.accept()
        session: LiveSession | None = None
        try:
            hello = json.loads(await websocket.receive_text())
            if hello.get("type") != "hello":
                await websocket.send_json({"type": "error", "detail": "expected hello"})
                await websocket.close()
                return
            cmap = None
            if interface == "pedal":
                if hello.get("map"):
                    cmap = CalibrationMap.from_dict(hello["map"])
                elif hello.get("synthetic_seed") is not None:
                    subject = SyntheticSubject.create(int(hello["synthetic_seed"]))
                    cmap = subject.calibrated_map()
                else:
                    await websocket.send_json(
                        {"type": "error", "detail": "pedal session needs a map or synthetic_seed"}
                    )
                    await websocket.close()
                    return
            session = LiveSession(
                path_id=path,
                interface=interface,
                cmap=cmap,
                trials=trials,
                log_dir=app.state.sessions_dir,
            )
            await websocket.send_json(
                {
                    "type": "ready",
                    "session_id": session.session_id,
                    "path": path,
                    "interface": interface,
                    "mode": mode,
                }
            )
            if mode == "lockstep":
                await _lockstep_loop(websocket, session)
            else:
                await _live_loop(websocket, session, rate)
        except (LiveSessionError, CalibrationError, GeometryError) as exc:
            await websocket.send_json({"type": "error", "detail": str(exc)})
            await websocket.close()
        except WebSocketDisconnect:
            pass
        finally:
            if session is not None and not session.finished:
                session.finish()

    async def _handle_client_message(websocket, session, msg) -> bool:
        """Returns False when the session should end."""
        kind = msg.get("type")
        if kind == "input":
            frame = msg["frame"]
            if frame["kind"] == "force":
                session.submit_input(ForceFrame(frame["t"], tuple(frame["f"])))
            elif frame["kind"] == "button":
                session.submit_input(ButtonFrame(frame["t"], tuple(frame["b"])))
            else:
                await websocket.send_json(
                    {"type": "error", "detail": f"unknown frame kind {frame['kind']!r}"}
                )
            return True
        if kind == "end":
            summary = session.finish()
            if msg.get("include_logs"):
                summary = dict(summary)
                summary["logs"] = {
                    t["trial_id"]: Path(t["log_path"]).read_text()
                    for t in summary["trials"]
                    if t["log_path"]
                }
            await websocket.send_json(summary)
            return False
        await websocket.send_json({"type": "error", "detail": f"unknown message {kind!r}"})
        return True

    async def _lockstep_loop(websocket: WebSocket, session: LiveSession) -> None:
        while True:
            msg = json.loads(await websocket.receive_text())
            if not await _handle_client_message(websocket, session, msg):
                return
            if msg.get("type") == "input" and not session.finished:
                state = session.tick()
                await websocket.send_json(state)
                if session.finished:
                    await websocket.send_json(session.summary())
                    return

    async def _live_loop(websocket: WebSocket, session: LiveSession, rate: float) -> None:
        period = 1.0 / rate
        loop = asyncio.get_running_loop()
        next_t = loop.time()
        while not session.finished:
            next_t += period
            try:
                while True:
                    timeout = max(0.0, next_t - loop.time())
                    text = await asyncio.wait_for(websocket.receive_text(), timeout=timeout)
                    if not await _handle_client_message(websocket, session, json.loads(text)):
                        return
            except asyncio.TimeoutError:
                pass
            state = session.tick()
            await websocket.send_json(state)
        await websocket.send_json(session.summary())

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


app = create_app()
