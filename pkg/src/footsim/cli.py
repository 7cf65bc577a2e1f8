"""Command-line entry points.

The CLI is a thin layer over the core package: ``run`` executes
headless experiments, ``calibrate`` validates/solves calibration
recordings, ``replay`` re-runs a session log, ``report`` renders
interface comparisons across runs, ``paths`` inspects the built-in
courses and ``serve`` hosts the HTTP/WebSocket service (optionally with
the UDP robot bridge). ``run`` can also post the experiment to a
running service with --server instead of computing locally.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .calibration import (
    CalibrationError,
    IcaConfig,
    derive_deadzones_gains,
    read_dataset,
    solve_ica,
    validate_dataset,
)
from .experiment import (
    ExperimentError,
    ExperimentSpec,
    format_result_table,
    run_experiment,
)
from .metrics import welch_t_test
from .paths import PATH_IDS, dump_path, get_path
from .session import SessionLogError, read_session, replay as replay_log
from .synthetic import SyntheticSubject


@click.group()
@click.version_option(version=__version__, prog_name="footsim")
def main():
    """Foot-interface teleoperation simulator and evaluation suite."""


@main.command()
@click.option("--interface", type=click.Choice(["pedal", "button"]), required=True)
@click.option("--path", "path_id", default="wire1", show_default=True,
              help="Course id (see `footsim paths`).")
@click.option("--trials", default=10, show_default=True,
              help="Trial count; directions alternate, odd trials run left to right.")
@click.option("--seed", default=1, show_default=True)
@click.option("--operator", "operator_json", default=None,
              help="JSON file or inline JSON overriding operator settings.")
@click.option("--log", "out_dir", type=click.Path(), default=None,
              help="Directory for session logs and reports.")
@click.option("--server", default=None, help="Post to a running service instead.")
def run(interface, path_id, trials, seed, operator_json, out_dir, server):
    """Run a headless experiment with a synthetic operator."""
    if trials < 1:
        raise click.UsageError("trials must be at least 1")
    if server:
        import urllib.request

        body = json.dumps(
            {"interface": interface, "path_id": path_id, "trials": trials, "seed": seed}
        ).encode()
        req = urllib.request.Request(
            server.rstrip("/") + "/api/experiments",
            data=body,
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(req) as resp:
            click.echo(resp.read().decode())
        return
    overrides = {}
    if operator_json:
        text = Path(operator_json).read_text() if Path(operator_json).is_file() else operator_json
        overrides = json.loads(text)
    try:
        kwargs = {}
        if interface == "pedal" and overrides:
            from .operators import PedalOperatorConfig

            kwargs["pedal_cfg"] = PedalOperatorConfig(**overrides)
        elif overrides:
            from .operators import ButtonOperatorConfig

            kwargs["button_cfg"] = ButtonOperatorConfig(**overrides)
        spec = ExperimentSpec(
            interface=interface, path_id=path_id, trials=trials, seed=seed, **kwargs
        )
        get_path(path_id)
        result = run_experiment(spec, out_dir=out_dir)
    except (ExperimentError, CalibrationError, TypeError, ValueError) as exc:
        raise click.ClickException(str(exc))
    click.echo(format_result_table(result))
    if not result.all_completed():
        raise click.ClickException("one or more trials timed out")


@main.command()
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), default=None,
              help="Calibration recording (JSON lines).")
@click.option("--synthetic-seed", type=int, default=None,
              help="Generate a synthetic subject recording instead.")
@click.option("--validate-only", is_flag=True, help="Only check completeness.")
@click.option("--seed", "ica_seed", default=0, show_default=True, help="ICA seed.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the solved map as JSON.")
def calibrate(dataset_path, synthetic_seed, validate_only, ica_seed, out_path):
    """Validate a calibration recording and solve the force-to-DOF map."""
    if (dataset_path is None) == (synthetic_seed is None):
        raise click.UsageError("provide exactly one of --dataset or --synthetic-seed")
    try:
        if dataset_path is not None:
            ds = read_dataset(dataset_path)
        else:
            ds = SyntheticSubject.create(synthetic_seed).dataset()
        report = validate_dataset(ds)
        click.echo(report.summary())
        if validate_only:
            sys.exit(0 if report.complete else 1)
        cmap = solve_ica(ds, IcaConfig(rng_seed=ica_seed))
        cmap = derive_deadzones_gains(ds, cmap)
    except CalibrationError as exc:
        raise click.ClickException(str(exc))
    corr = ", ".join(f"{c:.3f}" for c in cmap.info.get("axis_correlation", []))
    click.echo(f"solved in {cmap.info.get('iterations')} iterations; axis correlation {corr}")
    click.echo(f"map checksum {cmap.checksum()}")
    if out_path:
        payload = dict(cmap.to_dict(), checksum=cmap.checksum())
        Path(out_path).write_text(json.dumps(payload, indent=2) + "\n")
        click.echo(f"map written to {out_path}")


@main.command()
@click.option("--log", "log_path", type=click.Path(exists=True), required=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def replay(log_path, as_json):
    """Replay a session log and recompute its metrics (strict bit-check)."""
    try:
        report, trace = replay_log(read_session(log_path))
    except SessionLogError as exc:
        raise click.ClickException(str(exc))
    if as_json:
        click.echo(json.dumps(report.to_dict()))
        return
    click.echo(f"replayed {len(trace.samples)} samples: poses reproduced exactly")
    click.echo(
        f"completion {report.completion_time:.2f} s, error {report.error_rate:.2f}%, "
        f"|sal_trans| {report.jerk_trans:.3f}"
        + (f", |sal_rot| {report.jerk_rot:.3f}" if report.jerk_rot is not None else "")
    )


@main.command()
@click.argument("run_dirs", nargs=-1, required=True,
                type=click.Path(exists=True, file_okay=False))
@click.option("--json", "as_json", is_flag=True)
def report(run_dirs, as_json):
    """Compare experiment runs (pedal vs button per course)."""
    rows = []
    for d in run_dirs:
        path = Path(d) / "report.json"
        if not path.is_file():
            raise click.ClickException(f"{d}: no report.json")
        body = json.loads(path.read_text())
        metrics = [t["metrics"] for t in body["trials"] if t.get("metrics")]
        if not metrics:
            raise click.ClickException(f"{d}: no completed trials")
        rows.append(
            {
                "dir": str(d),
                "interface": body["spec"]["interface"],
                "path_id": body["spec"]["path_id"],
                "n": len(metrics),
                "completion_time": [m["completion_time"] for m in metrics],
                "error_rate": [m["error_rate"] for m in metrics],
                "jerk_trans": [abs(m["sal_trans"]) for m in metrics],
                "learning": body.get("learning"),
            }
        )
    if as_json:
        click.echo(json.dumps(rows, indent=2))
        return

    def mean(v):
        return sum(v) / len(v)

    def sd(v):
        if len(v) < 2:
            return 0.0
        m = mean(v)
        return (sum((x - m) ** 2 for x in v) / (len(v) - 1)) ** 0.5

    click.echo(f"{'run':<28}{'iface':<8}{'course':<8}{'n':>3}"
               f"{'time s':>14}{'err %':>8}{'|sal_t|':>9}{'  first3->last3 (time)'}")
    for r in rows:
        learn = ""
        if r["learning"] and "completion_time" in r["learning"]:
            e = r["learning"]["completion_time"]
            learn = f"  {e['first3']:.1f} -> {e['last3']:.1f} ({e['reduction_pct']:+.0f}%)"
        click.echo(
            f"{Path(r['dir']).name:<28}{r['interface']:<8}{r['path_id']:<8}{r['n']:>3}"
            f"{mean(r['completion_time']):8.1f} +/-{sd(r['completion_time']):4.1f}"
            f"{mean(r['error_rate']):8.2f}{mean(r['jerk_trans']):9.3f}{learn}"
        )
    by_path: dict[str, dict[str, dict]] = {}
    for r in rows:
        by_path.setdefault(r["path_id"], {})[r["interface"]] = r
    for pid, pair in sorted(by_path.items()):
        if "pedal" not in pair or "button" not in pair:
            continue
        p, b = pair["pedal"], pair["button"]
        click.echo(f"\n{pid}: pedal vs button")
        for metric in ("completion_time", "error_rate", "jerk_trans"):
            t = welch_t_test(p[metric], b[metric])
            ratio = mean(p[metric]) / mean(b[metric]) if mean(b[metric]) else float("nan")
            click.echo(
                f"  {metric:<16} pedal {mean(p[metric]):8.2f}  button {mean(b[metric]):8.2f}"
                f"  ratio {ratio:5.2f}  t={t.t:+.2f} df={t.df:.1f} p={t.p:.4f}"
            )


@main.command()
@click.option("--save", nargs=2, type=str, default=None, metavar="ID FILE",
              help="Export a course to a path file.")
def paths(save):
    """List the built-in wire courses."""
    if save:
        pid, out = save
        Path(out).write_text(dump_path(get_path(pid)))
        click.echo(f"{pid} written to {out}")
        return
    click.echo(f"{'id':<8}{'name':<16}{'length mm':>10}{'z mm':>7}{'segments':>9}")
    for pid in PATH_IDS:
        p = get_path(pid)
        click.echo(
            f"{p.path_id:<8}{p.name:<16}{p.total_length:10.1f}{p.z_extent():7.1f}"
            f"{len(p.segments):9d}"
        )


@main.command()
@click.option("--listen", default="127.0.0.1:8000", show_default=True,
              help="HTTP/WebSocket bind address.")
@click.option("--rate", default=30.0, show_default=True, help="Feedback rate, Hz.")
@click.option("--log", "sessions_dir", type=click.Path(), default="./footsim-sessions",
              show_default=True, help="Directory for session logs.")
@click.option("--udp-port", type=int, default=None,
              help="Also run the UDP robot bridge on this port.")
@click.option("--path", "path_id", default="wire1", show_default=True,
              help="Course for the UDP bridge session.")
@click.option("--interface", default="velocity", show_default=True,
              help="UDP bridge interface mode (velocity).")
@click.option("--static", "static_dir", type=click.Path(), default="frontend/dist",
              show_default=True, help="UI bundle to serve at /.")
def serve(listen, rate, sessions_dir, udp_port, path_id, interface, static_dir):
    """Serve the HTTP API, WebSocket bridge and optional UDP bridge."""
    import uvicorn

    from .service.app import create_app

    host, _, port = listen.partition(":")
    app = create_app(sessions_dir=sessions_dir, static_dir=static_dir)
    if udp_port is not None:
        from .bridge import serve_udp
        from .live import LiveSession

        @app.on_event("startup")
        async def _start_udp():
            session = LiveSession(
                path_id=path_id, interface=interface, trials=0, log_dir=sessions_dir
            )
            app.state.udp = await serve_udp(session, host=host or "127.0.0.1",
                                            port=udp_port, rate=rate)

    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")


if __name__ == "__main__":
    main()
