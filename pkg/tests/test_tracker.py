import math

import numpy as np
import pytest

from rtkar.geodesy import GeoPoint, LocalPoint, destination_point, geo_to_local, rotate_about_up
from rtkar.tracker import (
    CalibrationRecord,
    CalibrationRejectedError,
    DriftModel,
    HmdPose,
    InsufficientHistoryError,
    OverlayEstimate,
    calibrate,
    predictive_extrapolate,
    update_overlay,
    vslam_step,
)

FIX = GeoPoint(49.5, 6.36)
ORIGIN_POSE = HmdPose(LocalPoint(0, 0, 0), 0.0)


class TestCalibrate:
    def test_origin_north(self):
        rec = calibrate(FIX, ORIGIN_POSE)
        assert rec == CalibrationRecord(FIX, LocalPoint(0, 0, 0), 0.0)

    def test_yaw_inside_tolerance(self):
        rec = calibrate(FIX, HmdPose(LocalPoint(0, 0, 0), 0.4))
        assert rec.yaw_at_calibration_deg == pytest.approx(0.4)

    def test_yaw_outside_tolerance(self):
        with pytest.raises(CalibrationRejectedError) as exc:
            calibrate(FIX, HmdPose(LocalPoint(0, 0, 0), 1.2))
        assert exc.value.yaw_residual_deg == pytest.approx(1.2)

    def test_colocation_violated(self):
        with pytest.raises(CalibrationRejectedError) as exc:
            calibrate(FIX, ORIGIN_POSE, colocation_offset_m=0.2)
        assert exc.value.offset_m == pytest.approx(0.2)

    def test_negative_yaw_residual(self):
        rec = calibrate(FIX, HmdPose(LocalPoint(0, 0, 0), 359.7))
        assert rec.yaw_at_calibration_deg == pytest.approx(359.7)


class TestUpdateOverlay:
    def test_colocated_fix_is_reference(self):
        rec = calibrate(FIX, HmdPose(LocalPoint(3, 4, 0), 0.0))
        est = update_overlay(rec, FIX)
        assert est.target_hmd == LocalPoint(3, 4, 0)

    def test_ten_meters_north(self):
        rec = calibrate(FIX, ORIGIN_POSE)
        est = update_overlay(rec, destination_point(FIX, 0.0, 10.0))
        assert est.target_hmd.east_m == pytest.approx(0.0, abs=1e-3)
        assert est.target_hmd.north_m == pytest.approx(10.0, abs=1e-3)
        assert est.target_hmd.up_m == 0.0

    def test_yaw_90_rotates_north_to_west(self):
        rec = CalibrationRecord(FIX, LocalPoint(0, 0, 0), 90.0)
        est = update_overlay(rec, destination_point(FIX, 0.0, 10.0))
        assert est.target_hmd.east_m == pytest.approx(-10.0, abs=1e-3)
        assert est.target_hmd.north_m == pytest.approx(0.0, abs=1e-3)

    def test_exactness_along_trajectory(self):
        # with perfect calibration the overlay equals the true position in
        # HMD coordinates for arbitrary fixes
        rec = calibrate(FIX, ORIGIN_POSE)
        for bearing in range(0, 360, 45):
            for dist in (0.5, 10.0, 250.0, 900.0):
                fix = destination_point(FIX, float(bearing), dist)
                est = update_overlay(rec, fix)
                truth = geo_to_local(FIX, fix)
                assert math.hypot(est.target_hmd.east_m - truth.east_m,
                                  est.target_hmd.north_m - truth.north_m) < 1e-6

    def test_translation_invariance(self):
        fix = destination_point(FIX, 30.0, 123.0)
        base = update_overlay(calibrate(FIX, ORIGIN_POSE), fix)
        shifted = update_overlay(
            calibrate(FIX, HmdPose(LocalPoint(5.0, -2.0, 0.0), 0.0)), fix)
        assert shifted.target_hmd.east_m - base.target_hmd.east_m == pytest.approx(5.0, abs=1e-9)
        assert shifted.target_hmd.north_m - base.target_hmd.north_m == pytest.approx(-2.0, abs=1e-9)

    @pytest.mark.parametrize("yaw", [15.0, 90.0, 237.5])
    def test_rotation_consistency(self, yaw):
        fix = destination_point(FIX, 72.0, 800.0)
        base = update_overlay(CalibrationRecord(FIX, LocalPoint(0, 0, 0), 0.0), fix)
        rotated = update_overlay(CalibrationRecord(FIX, LocalPoint(0, 0, 0), yaw), fix)
        expected = rotate_about_up(base.target_hmd, yaw)
        assert rotated.target_hmd.east_m == pytest.approx(expected.east_m, abs=1e-9)
        assert rotated.target_hmd.north_m == pytest.approx(expected.north_m, abs=1e-9)

    def test_repeated_fix_repeats_output(self):
        rec = calibrate(FIX, ORIGIN_POSE)
        fix = destination_point(FIX, 10.0, 55.0)
        targets = {update_overlay(rec, fix).target_hmd for _ in range(10)}
        assert len(targets) == 1


class TestVslamStep:
    def test_pure_motion(self):
        rng = np.random.default_rng(0)
        pose = vslam_step(ORIGIN_POSE, LocalPoint(1, 0, 0), 0.0, DriftModel(), 1.0, rng)
        assert pose.position == LocalPoint(1, 0, 0)
        assert pose.yaw_deg == 0.0

    def test_random_walk_spread(self):
        # sigma 0.01 m/sqrt(s) over 3600 s -> 0.6 m spread per axis
        drift = DriftModel(random_walk_sigma_m_per_sqrt_s=0.01)
        finals = []
        for seed in range(200):
            rng = np.random.default_rng(seed)
            pose = ORIGIN_POSE
            for _ in range(3600):
                pose = vslam_step(pose, LocalPoint(0, 0, 0), 0.0, drift, 1.0, rng)
            finals.append((pose.position.east_m, pose.position.north_m))
        finals = np.array(finals)
        assert finals[:, 0].std(ddof=1) == pytest.approx(0.6, rel=0.10)
        assert finals[:, 1].std(ddof=1) == pytest.approx(0.6, rel=0.10)

    def test_linear_yaw_drift(self):
        drift = DriftModel(yaw_drift_deg_per_min=0.5)
        rng = np.random.default_rng(0)
        pose = ORIGIN_POSE
        for _ in range(120):
            pose = vslam_step(pose, LocalPoint(0, 0, 0), 0.0, drift, 1.0, rng)
        assert pose.yaw_deg == pytest.approx(1.0, abs=1e-9)


class TestPredictiveExtrapolate:
    def history(self):
        return [OverlayEstimate(LocalPoint(0, 0, 0), 1, 0),
                OverlayEstimate(LocalPoint(1, 0, 0), 2, 1000)]

    def test_horizon_zero_is_identity(self):
        assert predictive_extrapolate(self.history(), 0) == LocalPoint(1, 0, 0)

    def test_linear_extrapolation(self):
        p = predictive_extrapolate(self.history(), 500)
        assert p.east_m == pytest.approx(1.5)
        assert p.north_m == pytest.approx(0.0)

    def test_stationary_history(self):
        hist = [OverlayEstimate(LocalPoint(2, 3, 0), 1, 0),
                OverlayEstimate(LocalPoint(2, 3, 0), 2, 1000)]
        for horizon in (0, 100, 10_000):
            assert predictive_extrapolate(hist, horizon) == LocalPoint(2, 3, 0)

    def test_insufficient_history(self):
        with pytest.raises(InsufficientHistoryError):
            predictive_extrapolate([OverlayEstimate(LocalPoint(0, 0, 0), 1, 0)], 100)
