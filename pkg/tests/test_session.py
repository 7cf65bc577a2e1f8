import json

import pytest

from footsim.experiment import ExperimentSpec, run_experiment
from footsim.session import (
    SessionLogError,
    read_session,
    replay,
)


@pytest.fixture(scope="module")
def pedal_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("pedal-run")
    spec = ExperimentSpec(interface="pedal", path_id="wire1", trials=2, seed=5)
    result = run_experiment(spec, out_dir=out)
    assert result.all_completed()
    return out, result


@pytest.fixture(scope="module")
def button_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("button-run")
    spec = ExperimentSpec(interface="button", path_id="wire1", trials=1, seed=5)
    result = run_experiment(spec, out_dir=out)
    assert result.all_completed()
    return out, result


class TestReplayDeterminism:
    def test_pedal_log_replays_bit_identical(self, pedal_run):
        out, result = pedal_run
        for k, trial in enumerate(result.trials, start=1):
            log = read_session(out / f"trial_{k:02d}.jsonl")
            report, trace = replay(log)
            assert report == trial.metrics
            assert trace.t_start == trial.trace.t_start
            assert trace.t_end == trial.trace.t_end

    def test_button_log_replays_bit_identical(self, button_run):
        out, result = button_run
        log = read_session(out / "trial_01.jsonl")
        report, _ = replay(log)
        assert report == result.trials[0].metrics

    def test_replay_twice_identical(self, pedal_run):
        out, _ = pedal_run
        log = read_session(out / "trial_01.jsonl")
        r1, _ = replay(log)
        r2, _ = replay(log)
        assert r1 == r2


class TestLogValidation:
    def test_corrupted_line_named(self, pedal_run, tmp_path):
        out, _ = pedal_run
        lines = (out / "trial_01.jsonl").read_text().splitlines()
        lines[17] = lines[17][:-5] + "garbage"
        bad = tmp_path / "bad.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(SessionLogError, match="line 18"):
            read_session(bad)

    def test_checksum_mismatch_rejected(self, pedal_run, tmp_path):
        out, _ = pedal_run
        lines = (out / "trial_01.jsonl").read_text().splitlines()
        header = json.loads(lines[0])
        header["map"]["w"][0][0] += 1e-3
        lines[0] = json.dumps(header)
        bad = tmp_path / "tampered.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(SessionLogError, match="checksum"):
            read_session(bad)

    def test_missing_header_rejected(self, pedal_run, tmp_path):
        out, _ = pedal_run
        lines = (out / "trial_01.jsonl").read_text().splitlines()
        bad = tmp_path / "headless.jsonl"
        bad.write_text("\n".join(lines[1:]) + "\n")
        with pytest.raises(SessionLogError, match="header"):
            read_session(bad)

    def test_tampered_pose_detected_by_strict_replay(self, pedal_run, tmp_path):
        out, _ = pedal_run
        lines = (out / "trial_01.jsonl").read_text().splitlines()
        rec = json.loads(lines[40])
        assert rec["kind"] == "sample"
        rec["pose"][0] += 0.5
        lines[40] = json.dumps(rec)
        bad = tmp_path / "edited.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(SessionLogError, match="diverged"):
            replay(read_session(bad))

    def test_report_files_written(self, pedal_run):
        out, _ = pedal_run
        report = json.loads((out / "report.json").read_text())
        assert report["spec"]["interface"] == "pedal"
        assert len(report["trials"]) == 2
        assert all(t["completed"] for t in report["trials"])
        assert (out / "report.txt").read_text().startswith("experiment:")

    def test_direction_alternates(self, pedal_run):
        out, result = pedal_run
        assert result.trials[0].trace.direction == "left-to-right"
        assert result.trials[1].trace.direction == "right-to-left"


class TestFullBlock:
    def test_ten_trial_block_writes_logs_and_learning(self, tmp_path):
        spec = ExperimentSpec(interface="pedal", path_id="wire1", trials=10, seed=7)
        result = run_experiment(spec, out_dir=tmp_path)
        assert result.all_completed()
        logs = sorted(p.name for p in tmp_path.glob("trial_*.jsonl"))
        assert logs == [f"trial_{k:02d}.jsonl" for k in range(1, 11)]
        assert result.learning is not None
        entry = result.learning["completion_time"]
        times = [t.metrics.completion_time for t in result.trials]
        assert entry.first3 == pytest.approx(sum(times[:3]) / 3)
        assert entry.last3 == pytest.approx(sum(times[-3:]) / 3)
        directions = [t.trace.direction for t in result.trials]
        assert directions[::2] == ["left-to-right"] * 5
        assert directions[1::2] == ["right-to-left"] * 5
        body = json.loads((tmp_path / "report.json").read_text())
        assert "learning" in body
