import math

import pytest
from hypothesis import given, strategies as st

from footsim.core import (
    ButtonFrame,
    ForceFrame,
    ToolPose,
    VelocityCommand,
    wrap_angle,
    wrap_half_angle,
)


class TestWrapAngle:
    def test_identity(self):
        assert wrap_angle(0.0) == 0.0

    def test_forced_by_definition(self):
        assert wrap_angle(190.0) == -170.0

    def test_boundary_convention(self):
        assert wrap_angle(-180.0) == 180.0
        assert wrap_angle(180.0) == 180.0

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(ValueError):
            wrap_angle(bad)

    @given(st.floats(min_value=-1e7, max_value=1e7))
    def test_idempotent_and_in_range(self, x):
        y = wrap_angle(x)
        assert -180.0 < y <= 180.0
        assert wrap_angle(y) == y

    @given(st.floats(min_value=-1e5, max_value=1e5))
    def test_congruent_mod_360(self, x):
        y = wrap_angle(x)
        assert math.isclose(math.fmod(x - y, 360.0), 0.0, abs_tol=1e-6)


class TestWrapHalfAngle:
    def test_folds_by_180(self):
        assert wrap_half_angle(170.0) == -10.0
        assert wrap_half_angle(-95.0) == 85.0
        assert wrap_half_angle(90.0) == 90.0
        assert wrap_half_angle(-90.0) == 90.0


class TestFrames:
    def test_force_frame_channel_count(self):
        with pytest.raises(ValueError):
            ForceFrame(0.0, (0.0,) * 7)

    def test_force_frame_rejects_nan(self):
        with pytest.raises(ValueError):
            ForceFrame(0.0, (float("nan"),) + (0.0,) * 7)

    def test_button_frame(self):
        fr = ButtonFrame(1.0, (True,) + (False,) * 7)
        assert fr.b[0] is True and len(fr.b) == 8


class TestVelocityCommand:
    def test_clamped_within_limits(self):
        cmd = VelocityCommand.clamped(100.0, -100.0, 3.0, -99.0)
        assert cmd.as_tuple() == (6.0, -6.0, 3.0, -10.0)

    def test_clamped_custom_limits(self):
        cmd = VelocityCommand.clamped(5.0, 0.0, 0.0, 5.0, v_max_trans=2.0, w_max_rot=1.0)
        assert cmd.as_tuple() == (2.0, 0.0, 0.0, 1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            VelocityCommand(float("inf"), 0.0, 0.0, 0.0)

    @given(
        st.floats(allow_nan=False, allow_infinity=False, width=32),
        st.floats(allow_nan=False, allow_infinity=False, width=32),
        st.floats(allow_nan=False, allow_infinity=False, width=32),
        st.floats(allow_nan=False, allow_infinity=False, width=32),
    )
    def test_clamped_never_errors_and_respects_limits(self, vx, vy, vz, wz):
        cmd = VelocityCommand.clamped(vx, vy, vz, wz)
        assert abs(cmd.v_x) <= 6.0 and abs(cmd.v_y) <= 6.0 and abs(cmd.v_z) <= 6.0
        assert abs(cmd.w_z) <= 10.0


class TestToolPose:
    def test_theta_wrapped(self):
        pose = ToolPose(0.0, 0.0, 0.0, 361.0)
        assert pose.theta_t == 1.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ToolPose(float("nan"), 0.0, 0.0, 0.0)
