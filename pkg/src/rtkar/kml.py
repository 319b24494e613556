"""KML position messages: one Placemark per sensor fix.

The wire payload is a minimal KML document: a single Placemark holding a
Point (coordinates in KML's lon,lat,alt order) and ExtendedData entries for
the message metadata. decode_kml is the exact inverse of encode_kml.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .geodesy import GeoPoint

KML_NS = "http://www.opengis.net/kml/2.2"

SENSOR_KINDS = ("RTK", "GPS")
FIX_QUALITIES = ("FIXED", "FLOAT", "SPP")


class KmlError(ValueError):
    """Raised when a KML payload cannot be decoded; names the bad element."""


@dataclass(frozen=True)
class SensorMessage:
    sensor_id: str
    kind: str                 # RTK | GPS
    seq: int
    timestamp_ms: int
    position: GeoPoint
    fix_quality: str          # FIXED | FLOAT | SPP

    def __post_init__(self):
        if self.kind not in SENSOR_KINDS:
            raise ValueError(f"unknown sensor kind {self.kind!r}")
        if self.fix_quality not in FIX_QUALITIES:
            raise ValueError(f"unknown fix quality {self.fix_quality!r}")


def encode_kml(msg: SensorMessage) -> str:
    """Serialize a SensorMessage as a KML document string."""
    kml = ET.Element("kml", xmlns=KML_NS)
    pm = ET.SubElement(kml, "Placemark")
    ET.SubElement(pm, "name").text = msg.sensor_id
    ext = ET.SubElement(pm, "ExtendedData")
    for key, value in (("sensor_id", msg.sensor_id),
                       ("kind", msg.kind),
                       ("seq", str(msg.seq)),
                       ("timestamp_ms", str(msg.timestamp_ms)),
                       ("fix_quality", msg.fix_quality)):
        data = ET.SubElement(ext, "Data", name=key)
        ET.SubElement(data, "value").text = value
    point = ET.SubElement(pm, "Point")
    p = msg.position
    # repr() gives the shortest float text that round-trips exactly.
    ET.SubElement(point, "coordinates").text = (
        f"{p.longitude_deg!r},{p.latitude_deg!r},{p.altitude_m!r}")
    return ET.tostring(kml, encoding="unicode")


def decode_kml(text: str) -> SensorMessage:
    """Parse a KML document produced by encode_kml back into a SensorMessage."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise KmlError(f"malformed XML: {exc}") from exc
    ns = {"k": KML_NS}
    pm = root.find("k:Placemark", ns)
    if pm is None:
        pm = root.find("Placemark")  # tolerate un-namespaced documents
    if pm is None:
        raise KmlError("missing Placemark element")
    coords_el = pm.find("k:Point/k:coordinates", ns)
    if coords_el is None:
        coords_el = pm.find("Point/coordinates")
    if coords_el is None or not (coords_el.text or "").strip():
        raise KmlError("missing Point coordinates element")
    parts = coords_el.text.strip().split(",")
    if len(parts) == 2:
        parts.append("0")
    if len(parts) != 3:
        raise KmlError(f"bad coordinates element: {coords_el.text!r}")
    try:
        lon, lat, alt = (float(p) for p in parts)
    except ValueError as exc:
        raise KmlError(f"non-numeric coordinates element: {coords_el.text!r}") from exc
    if not -90.0 <= lat <= 90.0:
        raise KmlError(f"latitude out of range in coordinates element: {lat}")
    if not -360.0 <= lon <= 360.0:
        raise KmlError(f"longitude out of range in coordinates element: {lon}")

    ext = {}
    for data in pm.iter():
        tag = data.tag.rsplit("}", 1)[-1]
        if tag == "Data":
            value = data.find("k:value", ns)
            if value is None:
                value = data.find("value")
            ext[data.get("name", "")] = (value.text or "") if value is not None else ""
    for key in ("sensor_id", "kind", "seq", "timestamp_ms", "fix_quality"):
        if key not in ext:
            raise KmlError(f"missing ExtendedData entry: {key}")
    try:
        msg = SensorMessage(
            sensor_id=ext["sensor_id"],
            kind=ext["kind"],
            seq=int(ext["seq"]),
            timestamp_ms=int(ext["timestamp_ms"]),
            position=GeoPoint(lat, lon, alt),
            fix_quality=ext["fix_quality"],
        )
    except ValueError as exc:
        raise KmlError(f"bad ExtendedData value: {exc}") from exc
    return msg
