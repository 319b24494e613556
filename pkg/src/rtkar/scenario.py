"""Scenario configuration: YAML schema, defaults, and a stable digest.

Schema (all keys optional except trajectory.waypoints):

  seed: 42
  sample_dt_s: 0.1
  station: {latitude_deg, longitude_deg, altitude_m}
  survey:  {spp_sigma_m, fix_count}
  sensors:
    rtk: {id, sigma_east_m, sigma_north_m, bias_east_m, bias_north_m,
          jump_prob, jump_scale_m}
    gps: {id, ...}
  drift: {random_walk_sigma_m_per_sqrt_s, yaw_drift_deg_per_min}
  calibration: {yaw_residual_deg}
  throttle: {min_interval_ms}
  trajectory:
    loop: false
    waypoints:
      - {latitude_deg, longitude_deg, altitude_m, speed_mps, pause_s}
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import yaml

from .geodesy import GeoPoint, destination_point
from .sensors import (
    GPS_SIGMA_M,
    RTK_BIAS_EAST_M,
    RTK_SIGMA_M,
    NoiseModel,
    TrajectoryScript,
    Waypoint,
)
from .tracker import DriftModel


@dataclass(frozen=True)
class SensorSpec:
    sensor_id: str
    kind: str
    noise: NoiseModel


@dataclass(frozen=True)
class ScenarioConfig:
    script: TrajectoryScript
    rtk: SensorSpec
    gps: SensorSpec
    drift: DriftModel = DriftModel()
    station: GeoPoint = GeoPoint(49.5, 6.36)
    spp_sigma_m: float = 3.0
    survey_fix_count: int = 1000
    calibration_yaw_residual_deg: float = 0.0
    min_interval_ms: float = 100.0
    sample_dt_s: float = 0.1
    seed: int = 0

    def to_dict(self) -> dict:
        def noise_d(m: NoiseModel) -> dict:
            return {"sigma_east_m": m.sigma_east_m, "sigma_north_m": m.sigma_north_m,
                    "bias_east_m": m.bias_east_m, "bias_north_m": m.bias_north_m,
                    "jump_prob": m.jump_prob, "jump_scale_m": m.jump_scale_m}

        return {
            "seed": self.seed,
            "sample_dt_s": self.sample_dt_s,
            "station": {"latitude_deg": self.station.latitude_deg,
                        "longitude_deg": self.station.longitude_deg,
                        "altitude_m": self.station.altitude_m},
            "survey": {"spp_sigma_m": self.spp_sigma_m,
                       "fix_count": self.survey_fix_count},
            "sensors": {
                "rtk": {"id": self.rtk.sensor_id, **noise_d(self.rtk.noise)},
                "gps": {"id": self.gps.sensor_id, **noise_d(self.gps.noise)},
            },
            "drift": {"random_walk_sigma_m_per_sqrt_s":
                      self.drift.random_walk_sigma_m_per_sqrt_s,
                      "yaw_drift_deg_per_min": self.drift.yaw_drift_deg_per_min},
            "calibration": {"yaw_residual_deg": self.calibration_yaw_residual_deg},
            "throttle": {"min_interval_ms": self.min_interval_ms},
            "trajectory": {
                "loop": self.script.loop,
                "waypoints": [
                    {"latitude_deg": w.point.latitude_deg,
                     "longitude_deg": w.point.longitude_deg,
                     "altitude_m": w.point.altitude_m,
                     "speed_mps": w.speed_mps,
                     "pause_s": w.pause_s}
                    for w in self.script.waypoints],
            },
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _noise_from(d: dict, defaults: NoiseModel) -> NoiseModel:
    return NoiseModel(
        sigma_east_m=float(d.get("sigma_east_m", defaults.sigma_east_m)),
        sigma_north_m=float(d.get("sigma_north_m", defaults.sigma_north_m)),
        jump_prob=float(d.get("jump_prob", defaults.jump_prob)),
        jump_scale_m=float(d.get("jump_scale_m", defaults.jump_scale_m)),
        bias_east_m=float(d.get("bias_east_m", defaults.bias_east_m)),
        bias_north_m=float(d.get("bias_north_m", defaults.bias_north_m)),
    )


def config_from_dict(data: dict) -> ScenarioConfig:
    traj = data.get("trajectory", {})
    wps = []
    for w in traj.get("waypoints", []):
        wps.append(Waypoint(
            point=GeoPoint(float(w["latitude_deg"]), float(w["longitude_deg"]),
                           float(w.get("altitude_m", 0.0))),
            speed_mps=float(w.get("speed_mps", 1.0)),
            pause_s=float(w.get("pause_s", 0.0))))
    if not wps:
        raise ValueError("scenario needs trajectory.waypoints")
    script = TrajectoryScript(tuple(wps), loop=bool(traj.get("loop", False)))

    sensors = data.get("sensors", {})
    rtk_d = sensors.get("rtk", {})
    gps_d = sensors.get("gps", {})
    default_rtk = NoiseModel(sigma_east_m=RTK_SIGMA_M, sigma_north_m=RTK_SIGMA_M,
                             bias_east_m=RTK_BIAS_EAST_M)
    default_gps = NoiseModel(sigma_east_m=GPS_SIGMA_M, sigma_north_m=GPS_SIGMA_M)

    st = data.get("station", {})
    station = GeoPoint(float(st.get("latitude_deg", wps[0].point.latitude_deg)),
                       float(st.get("longitude_deg", wps[0].point.longitude_deg)),
                       float(st.get("altitude_m", 0.0)))
    survey = data.get("survey", {})
    drift_d = data.get("drift", {})
    return ScenarioConfig(
        script=script,
        rtk=SensorSpec(str(rtk_d.get("id", "rtk-rover")), "RTK",
                       _noise_from(rtk_d, default_rtk)),
        gps=SensorSpec(str(gps_d.get("id", "phone-gps")), "GPS",
                       _noise_from(gps_d, default_gps)),
        drift=DriftModel(
            random_walk_sigma_m_per_sqrt_s=float(
                drift_d.get("random_walk_sigma_m_per_sqrt_s", 0.0)),
            yaw_drift_deg_per_min=float(drift_d.get("yaw_drift_deg_per_min", 0.0))),
        station=station,
        spp_sigma_m=float(survey.get("spp_sigma_m", 3.0)),
        survey_fix_count=int(survey.get("fix_count", 1000)),
        calibration_yaw_residual_deg=float(
            data.get("calibration", {}).get("yaw_residual_deg", 0.0)),
        min_interval_ms=float(data.get("throttle", {}).get("min_interval_ms", 100.0)),
        sample_dt_s=float(data.get("sample_dt_s", 0.1)),
        seed=int(data.get("seed", 0)),
    )


def load_config(path: str) -> ScenarioConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"scenario config {path} must be a YAML mapping")
    return config_from_dict(data)


def reference_scenario(seed: int = 0, *, zero_noise: bool = False) -> ScenarioConfig:
    """Seven-pause urban course with the field-calibrated sensor noise.

    RTK sigma 0.126 m plus a 0.7 m constant east bias, GPS sigma 7.453 m;
    multipath jumps are off so the run stays in the calibrated regime.
    """
    origin = GeoPoint(49.5, 6.36)
    legs = [(0.0, 30.0), (60.0, 35.0), (120.0, 25.0), (200.0, 40.0),
            (270.0, 30.0), (330.0, 35.0), (45.0, 30.0)]
    wps = [Waypoint(origin, speed_mps=1.5, pause_s=0.0)]
    pos = origin
    for bearing, dist in legs:
        pos = destination_point(pos, bearing, dist)
        wps.append(Waypoint(pos, speed_mps=1.5, pause_s=4.0))
    if zero_noise:
        rtk = NoiseModel()
        gps = NoiseModel()
    else:
        rtk = NoiseModel(sigma_east_m=RTK_SIGMA_M, sigma_north_m=RTK_SIGMA_M,
                         bias_east_m=RTK_BIAS_EAST_M)
        gps = NoiseModel(sigma_east_m=GPS_SIGMA_M, sigma_north_m=GPS_SIGMA_M)
    return ScenarioConfig(
        script=TrajectoryScript(tuple(wps)),
        rtk=SensorSpec("rtk-rover", "RTK", rtk),
        gps=SensorSpec("phone-gps", "GPS", gps),
        station=origin,
        seed=seed,
    )
