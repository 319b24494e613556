"""Spherical geodesy: distances, bearings, and local tangent-plane offsets.

All math assumes a sphere of mean radius 6,371,000 m. At the sub-kilometre
baselines this project cares about the spherical error is far below sensor
noise, so no ellipsoidal model is provided.

Local frames are East-North-Up (ENU): east_m is the first component, north_m
the second, up_m the third.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0

#: Planar tangent-plane offsets are only trusted out to this baseline.
MAX_LOCAL_OFFSET_M = 50_000.0

#: Below this separation a bearing is meaningless.
COINCIDENT_DEG = 1e-12


class DegenerateBearingError(ValueError):
    """Bearing requested between (numerically) coincident points."""


class OffsetRangeError(ValueError):
    """Offset exceeds the planar-approximation validity bound."""


@dataclass(frozen=True)
class GeoPoint:
    """A WGS84 geodetic position. Longitude is normalized to [-180, 180)."""

    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        for name in ("latitude_deg", "longitude_deg", "altitude_m"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude_deg}")
        # only wrap when out of range: the modulo costs a few ULP otherwise
        if not -180.0 <= self.longitude_deg < 180.0:
            lon = (self.longitude_deg + 180.0) % 360.0 - 180.0
            object.__setattr__(self, "longitude_deg", lon)


@dataclass(frozen=True)
class LocalPoint:
    """A position in a local metric ENU frame."""

    east_m: float
    north_m: float
    up_m: float = 0.0

    def __post_init__(self):
        for name in ("east_m", "north_m", "up_m"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def __add__(self, other: "LocalPoint") -> "LocalPoint":
        return LocalPoint(self.east_m + other.east_m,
                          self.north_m + other.north_m,
                          self.up_m + other.up_m)


def normalize_bearing(degrees: float) -> float:
    """Wrap a bearing into [0, 360)."""
    wrapped = degrees % 360.0
    # the float mod of a tiny negative rounds up to exactly 360.0
    return 0.0 if wrapped >= 360.0 else wrapped


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters between two points."""
    lat1, lat2 = math.radians(a.latitude_deg), math.radians(b.latitude_deg)
    dlat = lat2 - lat1
    dlon = math.radians(b.longitude_deg - a.longitude_deg)
    h = (math.sin(dlat / 2.0) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2)
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def initial_bearing(origin: GeoPoint, target: GeoPoint) -> float:
    """Forward azimuth at `origin` toward `target`, degrees clockwise from north.

    Raises DegenerateBearingError for coincident points; callers that want a
    fallback must decide it themselves.
    """
    dlat = target.latitude_deg - origin.latitude_deg
    dlon = target.longitude_deg - origin.longitude_deg
    if abs(dlat) <= COINCIDENT_DEG and abs(dlon) <= COINCIDENT_DEG:
        raise DegenerateBearingError("bearing undefined between coincident points")
    lat1, lat2 = math.radians(origin.latitude_deg), math.radians(target.latitude_deg)
    dlon_r = math.radians(dlon)
    x = math.sin(dlon_r) * math.cos(lat2)
    y = (math.cos(lat1) * math.sin(lat2)
         - math.sin(lat1) * math.cos(lat2) * math.cos(dlon_r))
    return normalize_bearing(math.degrees(math.atan2(x, y)))


def destination_point(start: GeoPoint, bearing_deg: float, distance_m: float) -> GeoPoint:
    """Point reached from `start` along an initial bearing for `distance_m`.

    Standard forward geodesic on the sphere; serves as the independent oracle
    for the planar conversion below and as the simulators' truth generator.
    """
    if distance_m < 0:
        raise ValueError("distance must be non-negative")
    ang = distance_m / EARTH_RADIUS_M
    brg = math.radians(bearing_deg)
    lat1 = math.radians(start.latitude_deg)
    lon1 = math.radians(start.longitude_deg)
    lat2 = math.asin(math.sin(lat1) * math.cos(ang)
                     + math.cos(lat1) * math.sin(ang) * math.cos(brg))
    lon2 = lon1 + math.atan2(math.sin(brg) * math.sin(ang) * math.cos(lat1),
                             math.cos(ang) - math.sin(lat1) * math.sin(lat2))
    return GeoPoint(math.degrees(lat2), math.degrees(lon2), start.altitude_m)


def geo_to_local(reference: GeoPoint, target: GeoPoint) -> LocalPoint:
    """Planar ENU offset of `target` relative to `reference`.

    Composes great-circle distance and bearing into (east, north, 0); the up
    component is always zero. Valid for offsets up to MAX_LOCAL_OFFSET_M.
    """
    delta = haversine_distance(reference, target)
    if delta > MAX_LOCAL_OFFSET_M:
        raise OffsetRangeError(
            f"offset {delta:.0f} m exceeds planar validity bound {MAX_LOCAL_OFFSET_M:.0f} m")
    if delta == 0.0:
        return LocalPoint(0.0, 0.0, 0.0)
    try:
        beta = math.radians(initial_bearing(reference, target))
    except DegenerateBearingError:
        return LocalPoint(0.0, 0.0, 0.0)
    return LocalPoint(delta * math.sin(beta), delta * math.cos(beta), 0.0)


def local_to_geo(reference: GeoPoint, offset: LocalPoint) -> GeoPoint:
    """Inverse of geo_to_local: displace `reference` by a planar ENU offset.

    The up component is applied to altitude.
    """
    delta = math.hypot(offset.east_m, offset.north_m)
    if delta > MAX_LOCAL_OFFSET_M:
        raise OffsetRangeError(
            f"offset {delta:.0f} m exceeds planar validity bound {MAX_LOCAL_OFFSET_M:.0f} m")
    if delta == 0.0:
        moved = reference
    else:
        bearing = math.degrees(math.atan2(offset.east_m, offset.north_m))
        moved = destination_point(reference, bearing, delta)
    return GeoPoint(moved.latitude_deg, moved.longitude_deg,
                    reference.altitude_m + offset.up_m)


def overlay_position(p_ref_local: LocalPoint, delta: LocalPoint) -> LocalPoint:
    """Componentwise vector sum: the overlay sits at reference plus offset."""
    return p_ref_local + delta


def rotate_about_up(p: LocalPoint, yaw_deg: float) -> LocalPoint:
    """Express an ENU vector in a frame whose north axis points at compass
    bearing `yaw_deg` (i.e. undo a clockwise frame rotation). up is unchanged.
    """
    t = math.radians(yaw_deg)
    c, s = math.cos(t), math.sin(t)
    return LocalPoint(p.east_m * c - p.north_m * s,
                      p.east_m * s + p.north_m * c,
                      p.up_m)


def mean_position(fixes) -> GeoPoint:
    """Componentwise mean of co-located fixes (station survey average).

    Direct averaging is valid only for tightly clustered fixes; a longitude
    span above 1 degree is rejected.
    """
    fixes = list(fixes)
    if not fixes:
        raise ValueError("mean_position requires at least one fix")
    lons = [f.longitude_deg for f in fixes]
    if max(lons) - min(lons) > 1.0:
        raise OffsetRangeError("survey fixes span more than 1 degree of longitude")
    # average offsets from the first fix: exact for identical inputs and
    # better conditioned for tightly clustered ones
    n = len(fixes)
    base = fixes[0]
    return GeoPoint(
        base.latitude_deg + math.fsum(f.latitude_deg - base.latitude_deg for f in fixes) / n,
        base.longitude_deg + math.fsum(lon - base.longitude_deg for lon in lons) / n,
        base.altitude_m + math.fsum(f.altitude_m - base.altitude_m for f in fixes) / n)
