"""Simulated see-through HMD client: calibration, overlay updates, drift.

The HMD keeps a local metric frame established at startup. Calibration pins
that frame to the world: the wearer stands at the rover and faces north, and
the paired reference positions plus the residual yaw are frozen into a
CalibrationRecord. Every later rover fix is mapped into the HMD frame by
rotating its planar world offset through the calibration yaw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geodesy import (
    GeoPoint,
    LocalPoint,
    geo_to_local,
    haversine_distance,
    rotate_about_up,
)

#: Below this rover-to-reference distance the overlay sits at the reference.
COLOCATED_DELTA_M = 0.01

DEFAULT_YAW_TOLERANCE_DEG = 0.5
DEFAULT_COLOCATION_TOLERANCE_M = 0.05


class CalibrationRejectedError(ValueError):
    """Calibration preconditions violated; carries the measured residuals."""

    def __init__(self, message: str, offset_m: float = 0.0, yaw_residual_deg: float = 0.0):
        super().__init__(message)
        self.offset_m = offset_m
        self.yaw_residual_deg = yaw_residual_deg


class InsufficientHistoryError(ValueError):
    """Predictive extrapolation needs at least two timestamped estimates."""


@dataclass(frozen=True)
class HmdPose:
    position: LocalPoint
    yaw_deg: float = 0.0   # heading of the HMD frame's north axis vs true north

    def __post_init__(self):
        object.__setattr__(self, "yaw_deg", self.yaw_deg % 360.0)


@dataclass(frozen=True)
class CalibrationRecord:
    p_ref_world: GeoPoint
    p_ref_hmd: LocalPoint
    yaw_at_calibration_deg: float

    def __post_init__(self):
        object.__setattr__(self, "yaw_at_calibration_deg",
                           self.yaw_at_calibration_deg % 360.0)


@dataclass(frozen=True)
class DriftModel:
    """Local tracker imperfection: positional random walk and yaw drift."""

    random_walk_sigma_m_per_sqrt_s: float = 0.0
    yaw_drift_deg_per_min: float = 0.0

    def __post_init__(self):
        if self.random_walk_sigma_m_per_sqrt_s < 0 or self.yaw_drift_deg_per_min < 0:
            raise ValueError("drift parameters must be non-negative")


@dataclass(frozen=True)
class OverlayEstimate:
    target_hmd: LocalPoint
    source_seq: int
    computed_ms: int


def _signed_residual(yaw_deg: float) -> float:
    """Smallest signed angle of a heading away from due north."""
    r = yaw_deg % 360.0
    return r - 360.0 if r > 180.0 else r


def calibrate(rtk_fix: GeoPoint, pose: HmdPose, *,
              colocation_offset_m: float = 0.0,
              colocation_tolerance_m: float = DEFAULT_COLOCATION_TOLERANCE_M,
              yaw_tolerance_deg: float = DEFAULT_YAW_TOLERANCE_DEG) -> CalibrationRecord:
    """Freeze the world/HMD reference pair while the wearer stands at the rover.

    colocation_offset_m is the measured HMD-to-rover distance (the simulation
    knows it exactly); both it and the residual yaw must be within tolerance.
    """
    residual = _signed_residual(pose.yaw_deg)
    if colocation_offset_m > colocation_tolerance_m:
        raise CalibrationRejectedError(
            f"HMD is {colocation_offset_m:.3f} m from the rover "
            f"(tolerance {colocation_tolerance_m:.3f} m)",
            offset_m=colocation_offset_m, yaw_residual_deg=residual)
    if abs(residual) > yaw_tolerance_deg:
        raise CalibrationRejectedError(
            f"yaw residual {residual:.3f} deg exceeds tolerance {yaw_tolerance_deg:.3f} deg",
            offset_m=colocation_offset_m, yaw_residual_deg=residual)
    return CalibrationRecord(rtk_fix, pose.position, pose.yaw_deg)


def update_overlay(calib: CalibrationRecord, ugv_fix: GeoPoint, *,
                   source_seq: int = 0, computed_ms: int = 0) -> OverlayEstimate:
    """Map a world fix into the HMD frame through the calibration record.

    Target is the saved reference plus the planar world offset rotated by the
    calibration yaw; at sub-centimeter offsets it collapses to the reference.
    """
    delta = haversine_distance(calib.p_ref_world, ugv_fix)
    if delta < COLOCATED_DELTA_M:
        target = calib.p_ref_hmd
    else:
        offset = geo_to_local(calib.p_ref_world, ugv_fix)
        rotated = rotate_about_up(offset, calib.yaw_at_calibration_deg)
        target = LocalPoint(calib.p_ref_hmd.east_m + rotated.east_m,
                            calib.p_ref_hmd.north_m + rotated.north_m,
                            0.0)
    return OverlayEstimate(target, source_seq, computed_ms)


def vslam_step(pose: HmdPose, motion: LocalPoint, yaw_delta_deg: float,
               drift: DriftModel, dt: float, rng: np.random.Generator) -> HmdPose:
    """Advance the local pose by commanded motion plus drift noise over dt."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    sigma = drift.random_walk_sigma_m_per_sqrt_s * math.sqrt(dt)
    if sigma > 0:
        ne, nn = sigma * rng.standard_normal(2)
    else:
        ne = nn = 0.0
    pos = LocalPoint(pose.position.east_m + motion.east_m + ne,
                     pose.position.north_m + motion.north_m + nn,
                     pose.position.up_m + motion.up_m)
    yaw = pose.yaw_deg + yaw_delta_deg + drift.yaw_drift_deg_per_min * dt / 60.0
    return HmdPose(pos, yaw)


def predictive_extrapolate(history, horizon_ms: float) -> LocalPoint:
    """Constant-velocity extrapolation from the two most recent estimates."""
    history = list(history)
    if len(history) < 2:
        raise InsufficientHistoryError("need at least two overlay estimates")
    if horizon_ms < 0:
        raise ValueError("horizon must be non-negative")
    prev, last = history[-2], history[-1]
    p0, p1 = prev.target_hmd, last.target_hmd
    dt = last.computed_ms - prev.computed_ms
    if horizon_ms == 0 or dt <= 0:
        return p1
    f = horizon_ms / dt
    return LocalPoint(p1.east_m + f * (p1.east_m - p0.east_m),
                      p1.north_m + f * (p1.north_m - p0.north_m),
                      p1.up_m + f * (p1.up_m - p0.up_m))
