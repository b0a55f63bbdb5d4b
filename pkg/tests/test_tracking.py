import numpy as np
import pytest

from sunpump.solar import SunPosition, TrackerOrientation
from sunpump.tracking import (LdrReadings, TrackerCommand,
                              TrackingThresholds, apply_command, ldr_model,
                              tracking_sim, tracking_step)


class TestLdrModel:
    def test_aligned_zenith_equal_quadrants(self):
        sp = SunPosition(90.0, 0.0)
        to = TrackerOrientation(90.0, 0.0)
        r = ldr_model(sp, to, 1000.0)
        assert r.top_left == r.top_right == r.bottom_left == r.bottom_right
        assert r.top_left > 700   # cos 45 of full scale

    def test_dark(self):
        r = ldr_model(SunPosition(40.0, 100.0),
                      TrackerOrientation(40.0, 100.0), 0.0)
        assert (r.top_left, r.top_right, r.bottom_left, r.bottom_right) == \
            (0, 0, 0, 0)

    def test_sun_toward_plus_x_favors_right_pair(self):
        # tracker at azimuth 180, sun displaced toward smaller azimuth:
        # s . x_m = cos(se) sin(sa - ta) < 0 for sa < ta, so displacement
        # toward +x means sa > ta
        sp = SunPosition(45.0, 200.0)
        to = TrackerOrientation(45.0, 180.0)
        r = ldr_model(sp, to, 1000.0)
        assert r.top_right > r.top_left
        assert r.bottom_right > r.bottom_left

    def test_counts_in_range(self):
        r = ldr_model(SunPosition(45.0, 100.0),
                      TrackerOrientation(45.0, 100.0), 1500.0)
        for v in (r.top_left, r.top_right, r.bottom_left, r.bottom_right):
            assert 0 <= v <= 1023


class TestTrackingStep:
    def test_balanced_holds(self):
        cmd = tracking_step(LdrReadings(500, 500, 500, 500),
                            TrackingThresholds())
        assert cmd == TrackerCommand("hold", "hold", park=False)

    def test_night_parks(self):
        cmd = tracking_step(LdrReadings(1, 1, 1, 1), TrackingThresholds())
        assert cmd.park
        assert cmd.azimuth_move == "hold"
        assert cmd.elevation_move == "hold"

    def test_park_dominates_differences(self):
        cmd = tracking_step(LdrReadings(7, 0, 7, 0), TrackingThresholds())
        assert cmd.park

    def test_top_brighter_moves_up(self):
        cmd = tracking_step(LdrReadings(600, 600, 500, 500),
                            TrackingThresholds())
        assert cmd.elevation_move == "up"
        assert cmd.azimuth_move == "hold"

    def test_left_brighter_commands_right_label(self):
        cmd = tracking_step(LdrReadings(600, 500, 600, 500),
                            TrackingThresholds())
        assert cmd.azimuth_move == "right"
        assert cmd.elevation_move == "hold"

    def test_within_deadband_holds(self):
        cmd = tracking_step(LdrReadings(505, 500, 505, 500),
                            TrackingThresholds())
        assert cmd.azimuth_move == "hold"


class TestApplyCommand:
    def test_elevation_clamped(self):
        to = TrackerOrientation(179.5, 0.0)
        moved = apply_command(to, TrackerCommand("hold", "up"), 1.8)
        assert moved.theta_TE == 180.0

    def test_park_returns_initial(self):
        init = TrackerOrientation(90.0, 50.0)
        here = TrackerOrientation(40.0, 120.0)
        parked = apply_command(here, TrackerCommand("hold", "hold", True),
                               1.8, initial=init)
        assert parked == init

    def test_bounded_actuation(self):
        to = TrackerOrientation(50.0, 100.0)
        moved = apply_command(to, TrackerCommand("left", "down"), 1.8)
        assert abs(moved.theta_TE - to.theta_TE) <= 1.8
        assert abs(moved.theta_TA - to.theta_TA) <= 1.8


class TestTrackingSim:
    def test_fixed_sun_converges(self):
        sun = [SunPosition(45.0, 180.0)] * 120
        records = tracking_sim(sun, TrackingThresholds(), motor_step_deg=1.8,
                               start=TrackerOrientation(45.0, 160.0))
        aois = [r.alpha for r in records]
        # decreasing alignment error until the deadband stalls motion
        assert aois[-1] < 3.0
        worst_late = max(aois[60:])
        assert worst_late <= aois[0]

    def test_deadband_freezes_orientation(self):
        sun = [SunPosition(45.0, 180.0)] * 200
        records = tracking_sim(sun, TrackingThresholds(), motor_step_deg=1.8,
                               start=TrackerOrientation(45.0, 180.0))
        # aligned from the start: orientation never changes
        orientations = {(r.orientation.theta_TE, r.orientation.theta_TA)
                        for r in records}
        assert len(orientations) == 1

    def test_zero_irradiance_parks_at_initial(self):
        sun = [SunPosition(45.0, 180.0)] * 10
        start = TrackerOrientation(80.0, 150.0)
        records = tracking_sim(sun, TrackingThresholds(), irradiance=0.0,
                               start=start)
        assert all(r.command.park for r in records)
        assert all(r.orientation == start for r in records)

    def test_east_to_west_arc_followed(self):
        n = 400
        sun = [SunPosition(40.0, 120.0 + 120.0 * k / (n - 1))
               for k in range(n)]
        records = tracking_sim(sun, TrackingThresholds(), motor_step_deg=1.8,
                               start=TrackerOrientation(40.0, 120.0))
        final = records[-1]
        assert abs(final.orientation.theta_TA - 240.0) < 6.0
        assert final.alpha < 6.0

    def test_per_step_bound(self):
        sun = [SunPosition(45.0, 180.0)] * 50
        records = tracking_sim(sun, TrackingThresholds(), motor_step_deg=1.8,
                               start=TrackerOrientation(30.0, 150.0))
        prev = records[0].orientation
        for r in records[1:]:
            assert abs(r.orientation.theta_TE - prev.theta_TE) <= 1.8 + 1e-9
            assert abs(r.orientation.theta_TA - prev.theta_TA) <= 1.8 + 1e-9
            prev = r.orientation

    def test_empty_path_rejected(self):
        with pytest.raises(ValueError):
            tracking_sim([], TrackingThresholds())
