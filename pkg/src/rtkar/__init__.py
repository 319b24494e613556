"""Desk-scale RTK + see-through HMD outdoor tracking testbed."""

from .geodesy import (
    GeoPoint,
    LocalPoint,
    destination_point,
    geo_to_local,
    haversine_distance,
    initial_bearing,
    local_to_geo,
    mean_position,
    overlay_position,
)
from .kml import SensorMessage, decode_kml, encode_kml
from .sensors import NoiseModel, TrajectoryScript, Waypoint, sample_fix, step_trajectory, survey_station
from .tracker import (
    CalibrationRecord,
    DriftModel,
    HmdPose,
    OverlayEstimate,
    calibrate,
    predictive_extrapolate,
    update_overlay,
    vslam_step,
)

__all__ = [
    "GeoPoint", "LocalPoint", "SensorMessage", "NoiseModel",
    "TrajectoryScript", "Waypoint", "CalibrationRecord", "DriftModel",
    "HmdPose", "OverlayEstimate",
    "haversine_distance", "initial_bearing", "geo_to_local", "local_to_geo",
    "destination_point", "overlay_position", "mean_position",
    "encode_kml", "decode_kml", "sample_fix", "step_trajectory",
    "survey_station", "calibrate", "update_overlay", "vslam_step",
    "predictive_extrapolate",
]

__version__ = "0.1.0"
