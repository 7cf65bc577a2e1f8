import math

import numpy as np
import pytest

from footsim.core import DIRECTION_LTR, DIRECTION_RTL, ToolPose, wrap_angle
from footsim.paths import (
    PATH_IDS,
    build_wire1,
    builtin_paths,
    dump_path,
    get_path,
    parse_path,
)
from footsim.task import (
    Arc,
    GeometryError,
    Line,
    RingTool,
    TrialRunner,
    WirePath,
    detect_touch,
    wire_ring_clearance,
    zone_of,
)

from oracles import brute_force_clearance, pairwise_clearance


def straight_wire(length=200.0):
    return WirePath([Line((-length / 2, 0, 0), (length / 2, 0, 0))], path_id="straight")


def ring_at(x=0.0, y=0.0, z=0.0, theta=0.0):
    return RingTool(ToolPose(x, y, z, theta))


class TestSegments:
    def test_line_point_and_tangent(self):
        seg = Line((0, 0, 0), (10, 0, 0))
        assert np.allclose(seg.point(5.0), [5, 0, 0])
        assert np.allclose(seg.tangent(5.0), [1, 0, 0])

    def test_quarter_circle_arc(self):
        seg = Arc((0, 0, 0), (0, 0, 1), 10.0, 0.0, 90.0)
        quarter = seg.length / 2
        assert seg.length == pytest.approx(10 * math.pi / 2)
        p = seg.point(quarter)
        t = seg.tangent(quarter)
        ang = math.radians(45.0)
        assert np.allclose(p, [10 * math.cos(ang), 10 * math.sin(ang), 0])
        assert abs(np.dot(t, p / np.linalg.norm(p))) < 1e-12  # tangent perpendicular to radius

    def test_arc_closest_inside_sweep(self):
        seg = Arc((0, 0, 0), (0, 0, 1), 10.0, 0.0, 90.0)
        s, d = seg.closest(np.array([8.0, 8.0, 0.0]))
        assert s == pytest.approx(seg.length / 2, abs=1e-6)
        assert d == pytest.approx(abs(math.hypot(8, 8) - 10), abs=1e-9)

    def test_arc_closest_clamps_to_endpoints(self):
        seg = Arc((0, 0, 0), (0, 0, 1), 10.0, 0.0, 90.0)
        s, d = seg.closest(np.array([5.0, -4.0, 0.0]))
        assert s == 0.0

    def test_reversed_round_trip(self):
        seg = Arc((0, 0, 0), (0, 0, 1), 10.0, 30.0, 60.0)
        rev = seg.reversed()
        assert np.allclose(rev.start(), seg.end())
        assert np.allclose(rev.end(), seg.start())


class TestWirePath:
    def test_point_and_tangent_endpoints(self):
        path = build_wire1()
        p0, _ = path.point_and_tangent(0.0)
        assert np.allclose(p0, path.start_point())
        pe, _ = path.point_and_tangent(path.total_length)
        assert np.allclose(pe, path.end_point())

    def test_out_of_range_rejected(self):
        path = build_wire1()
        with pytest.raises(GeometryError):
            path.point_and_tangent(-1.0)
        with pytest.raises(GeometryError):
            path.point_and_tangent(path.total_length + 1.0)

    def test_broken_chain_rejected(self):
        with pytest.raises(GeometryError, match="chain"):
            WirePath([Line((0, 0, 0), (1, 0, 0)), Line((2, 0, 0), (3, 0, 0))])

    def test_reversed_traversal(self):
        path = build_wire1()
        rev = path.reversed()
        assert np.allclose(rev.start_point(), path.end_point())
        assert rev.total_length == pytest.approx(path.total_length)
        p, t = path.point_and_tangent(100.0)
        pr, tr = rev.point_and_tangent(path.total_length - 100.0)
        assert np.allclose(p, pr, atol=1e-9)
        assert np.allclose(t, -tr, atol=1e-9)


class TestBuiltinPaths:
    def test_three_paths_load(self):
        paths = builtin_paths()
        assert tuple(p.path_id for p in paths) == PATH_IDS

    def test_lengths_in_spec_band(self):
        for p in builtin_paths():
            assert 300.0 <= p.total_length <= 500.0

    def test_wire1_is_flat(self):
        assert get_path("wire1").z_extent() == pytest.approx(0.0, abs=1e-12)

    def test_wires_2_and_3_have_10mm_z(self):
        for pid in ("wire2", "wire3"):
            assert get_path(pid).z_extent() == pytest.approx(10.0, abs=1e-9)

    def test_two_ramps_each_on_3d_wires(self):
        for pid in ("wire2", "wire3"):
            path = get_path(pid)
            ramps = [
                seg for seg in path.segments
                if isinstance(seg, Line) and abs(seg.p1[2] - seg.p0[2]) > 1e-9
            ]
            assert len(ramps) == 2
            assert sorted(abs(seg.p1[2] - seg.p0[2]) for seg in ramps) == pytest.approx([10.0, 10.0])

    def test_corner_angle_classes(self):
        # Fillet arcs between straight legs must include turns equal to,
        # sharper than and wider than 90 degrees on every course.
        for path in builtin_paths():
            sweeps = [
                abs(seg.sweep_deg)
                for seg in path.segments
                if isinstance(seg, Arc) and abs(seg.sweep_deg) < 179.0
            ]
            assert any(abs(a - 90.0) < 1e-9 for a in sweeps), path.path_id
            assert any(a < 90.0 for a in sweeps), path.path_id
            assert any(a > 90.0 for a in sweeps), path.path_id

    def test_files_match_builders(self):
        from footsim.paths import _BUILDERS

        for pid, builder in _BUILDERS.items():
            shipped = get_path(pid)
            built = builder()
            assert dump_path(shipped) == dump_path(built)

    def test_parse_rejects_bad_version(self):
        with pytest.raises(GeometryError, match="version"):
            parse_path("version 9\nline 0 0 0 1 0 0\n")

    def test_parse_reports_line_numbers(self):
        with pytest.raises(GeometryError, match="line 2"):
            parse_path("version 1\nline 0 0 0\n")


class TestClearance:
    def test_concentric_perpendicular(self):
        c = wire_ring_clearance(ring_at(), straight_wire())
        assert c == pytest.approx(4.0 - 1.25, abs=1e-6)

    def test_inplane_offset_no_touch(self):
        c = wire_ring_clearance(ring_at(y=2.0), straight_wire())
        assert c == pytest.approx(0.75, abs=1e-6)
        assert not detect_touch(ring_at(y=2.0), straight_wire())

    def test_inplane_offset_touch(self):
        c = wire_ring_clearance(ring_at(y=3.0), straight_wire())
        assert c == pytest.approx(-0.25, abs=1e-6)
        assert detect_touch(ring_at(y=3.0), straight_wire())

    def test_touch_threshold_exactly_275(self):
        wire = straight_wire()
        for delta in (2.745, 2.749):
            assert not detect_touch(ring_at(y=delta), wire)
        for delta in (2.751, 2.755):
            assert detect_touch(ring_at(y=delta), wire)

    def test_tilted_ring_agrees_with_oracle(self):
        wire = straight_wire()
        ring = ring_at(theta=45.0)
        c = wire_ring_clearance(ring, wire)
        oracle = brute_force_clearance(wire, ring.center(), 45.0, ring.inner_radius)
        assert c == pytest.approx(oracle, abs=5e-3)
        deep = pairwise_clearance(wire, ring.center(), 45.0, ring.inner_radius)
        assert c == pytest.approx(deep, abs=2e-2)

    def test_clearance_continuous_in_pose(self):
        path = get_path("wire1")
        rng = np.random.default_rng(7)
        for _ in range(50):
            s = rng.uniform(0, path.total_length)
            p, t = path.point_and_tangent(float(s))
            theta = math.degrees(math.atan2(t[1], t[0])) + rng.normal(0, 20)
            base = ring_at(p[0] + rng.normal(0, 2), p[1] + rng.normal(0, 2),
                           p[2] + rng.normal(0, 2), wrap_angle(theta))
            nudged = ring_at(base.pose.x_t + 1e-4, base.pose.y_t, base.pose.z_t,
                             base.pose.theta_t)
            dc = abs(wire_ring_clearance(base, path) - wire_ring_clearance(nudged, path))
            assert dc < 1e-2

    def test_oracle_agreement_random_poses(self):
        # Smoke-scale version of the acceptance criterion.
        rng = np.random.default_rng(3)
        path = get_path("wire2")
        disagreements = 0
        for _ in range(60):
            s = rng.uniform(0, path.total_length)
            p, t = path.point_and_tangent(float(s))
            az = math.degrees(math.atan2(t[1], t[0]))
            pose = ToolPose(
                p[0] + rng.normal(0, 2.0),
                p[1] + rng.normal(0, 2.0),
                p[2] + rng.normal(0, 2.0),
                wrap_angle(az + rng.normal(0, 30)),
            )
            ring = RingTool(pose)
            c = wire_ring_clearance(ring, path)
            if abs(c) <= 0.01:
                continue
            oracle = brute_force_clearance(path, ring.center(), pose.theta_t,
                                           ring.inner_radius, n_wire=20000)
            if (c < 0) != (oracle < 0):
                disagreements += 1
        assert disagreements == 0


class TestTrialRunner:
    def test_stays_armed_inside_start_zone(self):
        path = straight_wire()
        trial = TrialRunner(path, DIRECTION_LTR)
        start = path.start_point()
        trial.update(ToolPose(start[0] + 1.0, 0.0, 0.0, 0.0), 0.5)
        assert trial.phase == "armed"

    def test_completion_time_window(self):
        path = straight_wire()
        trial = TrialRunner(path, DIRECTION_LTR)
        start = path.start_point()
        trial.update(ToolPose(start[0], 0, 0, 0), 1.0)
        trial.update(ToolPose(start[0] + 6.0, 0, 0, 0), 1.2)  # leaves 5 mm sphere
        assert trial.phase == "running" and trial.t_start == 1.2
        end = path.end_point()
        trial.update(ToolPose(end[0] - 6.0, 0, 0, 0), 20.0)
        trial.update(ToolPose(end[0] - 4.0, 0, 0, 0), 21.2)
        assert trial.phase == "done"
        assert trial.t_end - trial.t_start == pytest.approx(20.0)

    def test_reentering_start_zone_keeps_running(self):
        path = straight_wire()
        trial = TrialRunner(path, DIRECTION_LTR)
        s = path.start_point()
        trial.update(ToolPose(s[0] + 6.0, 0, 0, 0), 1.0)
        trial.update(ToolPose(s[0], 0, 0, 0), 2.0)
        assert trial.phase == "running"

    def test_right_to_left_swaps_zones(self):
        path = straight_wire()
        trial = TrialRunner(path, DIRECTION_RTL)
        assert np.allclose(trial.start_center, path.end_point())
        assert np.allclose(trial.end_center, path.start_point())

    def test_teleport_guard(self):
        path = straight_wire()
        trial = TrialRunner(path, DIRECTION_LTR)
        trial.update(ToolPose(-100, 0, 0, 0), 0.0)
        trial.update(ToolPose(0, 0, 0, 0), 1 / 120)
        assert trial.fault

    def test_touch_recording_only_while_running(self):
        path = straight_wire()
        trial = TrialRunner(path, DIRECTION_LTR)
        trial.record_touch(True)
        assert trial.touch_flags == []
        s = path.start_point()
        trial.update(ToolPose(s[0] + 6.0, 0, 0, 0), 1.0)
        trial.record_touch(True)
        trial.record_touch(False)
        assert trial.touch_flags == [True, False]

    def test_zone_labels(self):
        path = straight_wire()
        start, end = path.start_point(), path.end_point()
        assert zone_of(ToolPose(*start, 0), start, end) == "start"
        assert zone_of(ToolPose(*end, 0), start, end) == "end"
        assert zone_of(ToolPose(0, 20, 0, 0), start, end) == "free"
