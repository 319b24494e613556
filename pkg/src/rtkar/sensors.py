"""Seedable simulators: UGV trajectory, RTK rover, phone GPS, station survey.

Every random draw goes through a caller-supplied numpy Generator, so a seed
fully determines the emitted message stream. Noise is expressed in the local
ENU tangent plane (sigmas are exact meters at any latitude) and applied to
the geodetic truth via the forward geodesic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geodesy import (
    GeoPoint,
    LocalPoint,
    destination_point,
    haversine_distance,
    local_to_geo,
    mean_position,
)
from .kml import SensorMessage


class InsufficientDataError(ValueError):
    """Not enough fixes to satisfy the requested survey window."""


@dataclass(frozen=True)
class Waypoint:
    point: GeoPoint
    speed_mps: float = 1.0    # speed on the segment leaving this waypoint
    pause_s: float = 0.0

    def __post_init__(self):
        if self.speed_mps <= 0:
            raise ValueError("speed must be positive")
        if self.pause_s < 0:
            raise ValueError("pause must be non-negative")


@dataclass(frozen=True)
class TrajectoryScript:
    waypoints: tuple[Waypoint, ...]
    loop: bool = False

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("a trajectory needs at least one waypoint")
        object.__setattr__(self, "waypoints", tuple(self.waypoints))

    def segments(self):
        """Yield (t_start, duration, kind, index); kind is 'pause' or 'travel'."""
        t = 0.0
        n = len(self.waypoints)
        last = n if self.loop else n - 1
        for i in range(n):
            wp = self.waypoints[i]
            if wp.pause_s > 0:
                yield (t, wp.pause_s, "pause", i)
                t += wp.pause_s
            if i < last:
                nxt = self.waypoints[(i + 1) % n]
                dist = haversine_distance(wp.point, nxt.point)
                dur = dist / wp.speed_mps
                if dur > 0:
                    yield (t, dur, "travel", i)
                    t += dur

    def duration_s(self) -> float:
        return sum(seg[1] for seg in self.segments())

    def pause_times(self):
        """(t_start, waypoint_index) for every pause window, in order."""
        return [(t, i) for t, _, kind, i in self.segments() if kind == "pause"]


def _slerp(a: GeoPoint, b: GeoPoint, f: float) -> GeoPoint:
    """Great-circle interpolation between two points; exact at f=0 and f=1."""
    la1, lo1 = math.radians(a.latitude_deg), math.radians(a.longitude_deg)
    la2, lo2 = math.radians(b.latitude_deg), math.radians(b.longitude_deg)
    v1 = np.array([math.cos(la1) * math.cos(lo1), math.cos(la1) * math.sin(lo1), math.sin(la1)])
    v2 = np.array([math.cos(la2) * math.cos(lo2), math.cos(la2) * math.sin(lo2), math.sin(la2)])
    omega = math.acos(min(1.0, max(-1.0, float(np.dot(v1, v2)))))
    if omega < 1e-12:
        v = v1
    else:
        v = (math.sin((1 - f) * omega) * v1 + math.sin(f * omega) * v2) / math.sin(omega)
    v = v / np.linalg.norm(v)
    lat = math.degrees(math.asin(float(v[2])))
    lon = math.degrees(math.atan2(float(v[1]), float(v[0])))
    alt = a.altitude_m + f * (b.altitude_m - a.altitude_m)
    return GeoPoint(lat, lon, alt)


def step_trajectory(script: TrajectoryScript, t: float) -> tuple[GeoPoint, bool]:
    """Position along the script at time t, plus whether the rover is paused.

    Travel segments run at constant speed along the great circle. Beyond the
    final waypoint the rover stays there (paused) unless the script loops.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    if len(script.waypoints) == 1:
        return script.waypoints[0].point, True
    total = script.duration_s()
    if script.loop and total > 0:
        t = t % total
    n = len(script.waypoints)
    for t0, dur, kind, i in script.segments():
        if t < t0 + dur:
            if kind == "pause":
                return script.waypoints[i].point, True
            a = script.waypoints[i].point
            b = script.waypoints[(i + 1) % n].point
            return _slerp(a, b, (t - t0) / dur), False
    return script.waypoints[-1].point, True


@dataclass(frozen=True)
class NoiseModel:
    """Per-axis Gaussian noise plus constant bias and occasional multipath jumps."""

    sigma_east_m: float = 0.0
    sigma_north_m: float = 0.0
    jump_prob: float = 0.0
    jump_scale_m: float = 0.0
    bias_east_m: float = 0.0
    bias_north_m: float = 0.0

    def __post_init__(self):
        if self.sigma_east_m < 0 or self.sigma_north_m < 0:
            raise ValueError("sigmas must be non-negative")
        if not 0.0 <= self.jump_prob <= 1.0:
            raise ValueError("jump_prob must be in [0, 1]")
        if self.jump_scale_m < 0:
            raise ValueError("jump_scale_m must be non-negative")


# Defaults reproduce the observed field behavior: meter-scale jumpy GPS and a
# centimeter-noise RTK fix riding on a near-constant offset.
GPS_SIGMA_M = 7.453
RTK_SIGMA_M = 0.126
RTK_BIAS_EAST_M = 0.7

GPS_NOISE = NoiseModel(sigma_east_m=GPS_SIGMA_M, sigma_north_m=GPS_SIGMA_M,
                       jump_prob=0.05, jump_scale_m=15.0)
RTK_NOISE = NoiseModel(sigma_east_m=RTK_SIGMA_M, sigma_north_m=RTK_SIGMA_M,
                       bias_east_m=RTK_BIAS_EAST_M)


def sample_fix(true_pos: GeoPoint, model: NoiseModel, rng: np.random.Generator) -> GeoPoint:
    """One noisy fix: truth + bias + Gaussian per ENU axis + optional jump.

    The same number of draws is consumed regardless of parameters, so streams
    with different sigmas but the same seed stay draw-aligned.
    """
    ge, gn = rng.standard_normal(2)
    de = model.bias_east_m + model.sigma_east_m * ge
    dn = model.bias_north_m + model.sigma_north_m * gn
    u = rng.random()
    jump_angle = rng.uniform(0.0, 2.0 * math.pi)
    jump_mag = rng.uniform(0.0, model.jump_scale_m) if model.jump_scale_m > 0 else 0.0
    if u < model.jump_prob:
        de += jump_mag * math.sin(jump_angle)
        dn += jump_mag * math.cos(jump_angle)
    if de == 0.0 and dn == 0.0:
        return true_pos
    return local_to_geo(true_pos, LocalPoint(de, dn, 0.0))


def survey_station(fixes, n: int = 1000) -> GeoPoint:
    """Average of the last n single-point fixes (automatic station survey)."""
    fixes = list(fixes)
    if n < 1:
        raise ValueError("n must be at least 1")
    if len(fixes) < n:
        raise InsufficientDataError(f"need {n} fixes, have {len(fixes)}")
    return mean_position(fixes[-n:])


@dataclass
class UgvSim:
    """Command-driven rover: follows a script until overridden by drive/pause.

    Used by the relay's embedded runtime; the offline harness addresses
    step_trajectory directly.
    """

    script: TrajectoryScript | None = None
    position: GeoPoint = field(default_factory=lambda: GeoPoint(0.0, 0.0))
    heading_deg: float = 0.0
    speed_mps: float = 0.0
    paused: bool = True
    t: float = 0.0
    manual: bool = False

    def __post_init__(self):
        if self.script is not None:
            self.position, self.paused = step_trajectory(self.script, 0.0)

    def drive(self, heading_deg: float, speed_mps: float):
        if speed_mps < 0:
            raise ValueError("speed must be non-negative")
        self.manual = True
        self.heading_deg = heading_deg % 360.0
        self.speed_mps = speed_mps
        self.paused = speed_mps == 0.0

    def pause(self):
        self.manual = True
        self.paused = True

    def resume(self):
        self.paused = False
        if not self.manual and self.script is None:
            self.manual = True

    def step(self, dt: float):
        if dt < 0:
            raise ValueError("dt must be non-negative")
        self.t += dt
        if self.manual:
            if not self.paused and self.speed_mps > 0:
                self.position = destination_point(
                    self.position, self.heading_deg, self.speed_mps * dt)
        elif self.script is not None:
            self.position, self.paused = step_trajectory(self.script, self.t)
        return self.position, self.paused


class SensorFeed:
    """Emits SensorMessages for a rover position at a fixed rate (default 10 Hz)."""

    def __init__(self, sensor_id: str, kind: str, model: NoiseModel,
                 rng: np.random.Generator, rate_hz: float = 10.0,
                 fix_quality: str | None = None):
        if rate_hz <= 0:
            raise ValueError("rate must be positive")
        self.sensor_id = sensor_id
        self.kind = kind
        self.model = model
        self.rng = rng
        self.interval_ms = 1000.0 / rate_hz
        self.fix_quality = fix_quality or ("FIXED" if kind == "RTK" else "SPP")
        self.seq = 0
        self._next_due_ms = 0.0

    def poll(self, now_ms: float, true_pos: GeoPoint) -> SensorMessage | None:
        """Return a message if one is due at now_ms, else None."""
        if now_ms < self._next_due_ms:
            return None
        self._next_due_ms = now_ms + self.interval_ms
        self.seq += 1
        return SensorMessage(
            sensor_id=self.sensor_id,
            kind=self.kind,
            seq=self.seq,
            timestamp_ms=int(now_ms),
            position=sample_fix(true_pos, self.model, self.rng),
            fix_quality=self.fix_quality,
        )
