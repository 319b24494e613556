"""Transport-free relay logic: registry, throttle, routing, metrics.

RelayCore consumes (session_id, Envelope, now_ms) and returns a list of
effects for the transport layer to execute:

  ("deliver", session_id, envelope)   queue envelope to a subscriber
  ("reply",   session_id, envelope)   direct reply to the sender (NACKs)
  ("command", dict)                   hand a parsed command to the simulator
  ("close",   session_id, reason)     drop a misbehaving connection

Keeping the core synchronous makes throttle and ordering behavior testable
with a fake clock and no sockets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .envelope import Envelope, EnvelopeError, parse_command
from .kml import KmlError, decode_kml

DEFAULT_MIN_INTERVAL_MS = 100.0


class ProtocolError(ValueError):
    pass


@dataclass
class SessionInfo:
    sid: str
    role: str


@dataclass
class RelayMetrics:
    accepted: dict = field(default_factory=dict)      # sensor_id -> count
    dropped: dict = field(default_factory=dict)       # sensor_id -> count (throttled)
    nacks: int = 0
    latency_ms: list = field(default_factory=list)    # ingest-to-write, filled by transport

    def snapshot(self, queue_depths: dict | None = None) -> dict:
        lat = sorted(self.latency_ms)

        def pct(p):
            if not lat:
                return 0.0
            return lat[min(len(lat) - 1, int(p * len(lat)))]

        return {
            "accepted": dict(self.accepted),
            "dropped": dict(self.dropped),
            "nacks": self.nacks,
            "queue_depths": dict(queue_depths or {}),
            "latency_ms": {"count": len(lat), "p50": pct(0.50),
                           "p99": pct(0.99), "max": lat[-1] if lat else 0.0},
        }


def _nack(reason: str) -> Envelope:
    return Envelope(msg_type="METRICS", role="console", sensor_id="server",
                    payload=json.dumps({"nack": reason}))


class RelayCore:
    """Registry + throttle + fan-out routing for one relay instance."""

    #: who receives what
    _TARGETS = {"POSITION": ("hmd", "console"),
                "SAMPLE_MARK": ("hmd", "console"),
                "METRICS": ("console",)}

    def __init__(self, min_interval_ms: float = DEFAULT_MIN_INTERVAL_MS):
        if min_interval_ms < 0:
            raise ValueError("min_interval_ms must be non-negative")
        self.min_interval_ms = min_interval_ms
        self.sessions: dict[str, SessionInfo] = {}
        self.metrics = RelayMetrics()
        self._last_accept_ms: dict[str, float] = {}
        self._last_seq: dict[tuple, int] = {}

    # -- registry ----------------------------------------------------------

    def register(self, sid: str, role: str):
        if role not in ("sensor", "hmd", "console"):
            raise ProtocolError(f"unknown role {role!r}")
        if sid in self.sessions:
            raise ProtocolError(f"session {sid!r} already registered")
        self.sessions[sid] = SessionInfo(sid, role)

    def unregister(self, sid: str):
        self.sessions.pop(sid, None)

    def subscribers(self, roles, exclude: str = "") -> list[str]:
        return [s.sid for s in self.sessions.values()
                if s.role in roles and s.sid != exclude]

    # -- message handling --------------------------------------------------

    def handle(self, sid: str, env: Envelope, now_ms: float) -> list[tuple]:
        session = self.sessions.get(sid)
        if session is None:
            return [("close", sid, "not registered (HELLO required first)")]
        if env.msg_type == "HELLO":
            self.metrics.nacks += 1
            return [("reply", sid, _nack("already registered"))]
        if env.msg_type == "POSITION":
            return self._handle_position(session, env, now_ms)
        if env.msg_type in ("COMMAND", "SAMPLE_MARK"):
            return self._handle_command(session, env)
        if env.msg_type == "METRICS":
            snap = self.metrics.snapshot()
            return [("reply", sid, Envelope(msg_type="METRICS", role="console",
                                            sensor_id="server",
                                            payload=json.dumps(snap, sort_keys=True)))]
        self.metrics.nacks += 1
        return [("reply", sid, _nack(f"unexpected msg_type {env.msg_type}"))]

    def _handle_position(self, session: SessionInfo, env: Envelope,
                         now_ms: float) -> list[tuple]:
        if session.role != "sensor":
            self.metrics.nacks += 1
            return [("reply", session.sid, _nack("POSITION only accepted from sensors"))]
        try:
            decode_kml(env.payload)
        except KmlError as exc:
            self.metrics.nacks += 1
            return [("reply", session.sid, _nack(f"undecodable KML payload: {exc}"))]
        key = (env.role, env.sensor_id)
        last_seq = self._last_seq.get(key)
        if last_seq is not None and env.seq <= last_seq:
            self.metrics.nacks += 1
            return [("reply", session.sid,
                     _nack(f"non-increasing seq {env.seq} for {env.sensor_id}"))]
        self._last_seq[key] = env.seq

        last = self._last_accept_ms.get(env.sensor_id)
        if last is not None and now_ms - last < self.min_interval_ms:
            self.metrics.dropped[env.sensor_id] = \
                self.metrics.dropped.get(env.sensor_id, 0) + 1
            return []
        self._last_accept_ms[env.sensor_id] = now_ms
        self.metrics.accepted[env.sensor_id] = \
            self.metrics.accepted.get(env.sensor_id, 0) + 1
        return [("deliver", t, env)
                for t in self.subscribers(self._TARGETS["POSITION"])]

    def _handle_command(self, session: SessionInfo, env: Envelope) -> list[tuple]:
        if session.role != "console":
            self.metrics.nacks += 1
            return [("reply", session.sid, _nack("commands only accepted from consoles"))]
        if env.msg_type == "SAMPLE_MARK":
            cmd = {"cmd": "mark_sample", "label": env.payload.strip() or "sample"}
        else:
            try:
                cmd = parse_command(env.payload)
            except EnvelopeError as exc:
                self.metrics.nacks += 1
                return [("reply", session.sid, _nack(str(exc)))]
        effects: list[tuple] = [("command", cmd)]
        if cmd["cmd"] in ("calibrate", "mark_sample"):
            effects += [("deliver", t, env)
                        for t in self.subscribers(("hmd", "console"),
                                                  exclude=session.sid)]
        return effects

    # -- server-originated broadcast --------------------------------------

    def emit(self, env: Envelope) -> list[tuple]:
        """Broadcast a server-originated envelope (harness results, metrics)."""
        roles = self._TARGETS.get(env.msg_type, ("hmd", "console"))
        return [("deliver", t, env) for t in self.subscribers(roles)]
