"""Newline-delimited envelope protocol shared by all relay participants.

One envelope per line, JSON-encoded with sorted keys so identical envelopes
serialize to identical bytes. The KML position payload rides inside the
`payload` field as an escaped string.

Fields:
  msg_type   HELLO | POSITION | COMMAND | SAMPLE_MARK | METRICS
  role       sensor | hmd | console
  sensor_id  originating sensor (POSITION) or logical sender id
  seq        per-(role, sensor_id) strictly increasing counter
  sent_ms    sender clock, milliseconds
  payload    KML document (POSITION), command text (COMMAND), or JSON blob
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

MSG_TYPES = ("HELLO", "POSITION", "COMMAND", "SAMPLE_MARK", "METRICS")
ROLES = ("sensor", "hmd", "console")


class EnvelopeError(ValueError):
    """Malformed envelope line or illegal field value."""


@dataclass(frozen=True)
class Envelope:
    msg_type: str
    role: str
    sensor_id: str = ""
    seq: int = 0
    sent_ms: int = 0
    payload: str = ""

    def __post_init__(self):
        if self.msg_type not in MSG_TYPES:
            raise EnvelopeError(f"unknown msg_type {self.msg_type!r}")
        if self.role not in ROLES:
            raise EnvelopeError(f"unknown role {self.role!r}")

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_line(cls, line: str | bytes) -> "Envelope":
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EnvelopeError(f"bad envelope JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise EnvelopeError("envelope must be a JSON object")
        try:
            return cls(
                msg_type=str(obj["msg_type"]),
                role=str(obj["role"]),
                sensor_id=str(obj.get("sensor_id", "")),
                seq=int(obj.get("seq", 0)),
                sent_ms=int(obj.get("sent_ms", 0)),
                payload=str(obj.get("payload", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise EnvelopeError(f"bad envelope fields: {exc}") from exc


def parse_command(text: str) -> dict:
    """Parse console command text into a {cmd, ...} dict.

    Grammar: `drive <heading_deg> <speed_mps>` | `pause` | `resume` |
    `calibrate` | `mark_sample <label>`.
    """
    parts = text.strip().split()
    if not parts:
        raise EnvelopeError("empty command")
    cmd = parts[0]
    if cmd == "drive":
        if len(parts) != 3:
            raise EnvelopeError("drive needs heading and speed")
        try:
            heading, speed = float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise EnvelopeError("drive arguments must be numeric") from exc
        if speed < 0:
            raise EnvelopeError("drive speed must be non-negative")
        return {"cmd": "drive", "heading_deg": heading, "speed_mps": speed}
    if cmd in ("pause", "resume", "calibrate"):
        if len(parts) != 1:
            raise EnvelopeError(f"{cmd} takes no arguments")
        return {"cmd": cmd}
    if cmd == "mark_sample":
        if len(parts) != 2:
            raise EnvelopeError("mark_sample needs a label")
        return {"cmd": "mark_sample", "label": parts[1]}
    raise EnvelopeError(f"unknown command {cmd!r}")
