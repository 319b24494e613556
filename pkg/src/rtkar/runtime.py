"""Embedded scenario runtime for live relay sessions.

Runs the rover simulator, both sensor feeds, the HMD tracker, and the
sampling harness inside the relay process. Sensor messages are pushed through
the same RelayCore path as external sensors, so throttling, ordering, and
payload transparency apply to simulated traffic too.

Console-facing state (truth/fix/overlay positions in ENU relative to the
calibration reference, paused flag, live metrics) is broadcast as METRICS
envelopes with a JSON `state` payload, keeping all geodesy server-side.
"""

from __future__ import annotations

import json

import numpy as np

from .envelope import Envelope
from .evalharness import ErrorSample, record_sample, samples_to_csv
from .geodesy import GeoPoint, LocalPoint, geo_to_local, rotate_about_up
from .kml import encode_kml
from .relay import RelayCore
from .scenario import ScenarioConfig
from .sensors import SensorFeed, UgvSim
from .tracker import HmdPose, calibrate, update_overlay


class ScenarioRuntime:
    """Single-owner simulation stepped by the relay's clock."""

    def __init__(self, core: RelayCore, config: ScenarioConfig):
        self.core = core
        self.config = config
        self.ugv = UgvSim(script=config.script)
        root = np.random.default_rng(config.seed)
        rtk_rng, gps_rng = root.spawn(2)
        self.feeds = [
            SensorFeed(config.rtk.sensor_id, "RTK", config.rtk.noise, rtk_rng),
            SensorFeed(config.gps.sensor_id, "GPS", config.gps.noise, gps_rng),
        ]
        self.calib = None
        self.latest_overlay = {}       # kind -> OverlayEstimate
        self.samples: list[ErrorSample] = []
        self._env_seq = 0
        self._mark_count = 0
        self._sensor_sids = {}
        for feed in self.feeds:
            sid = f"sim:{feed.sensor_id}"
            core.register(sid, "sensor")
            self._sensor_sids[feed.sensor_id] = sid

    # -- commands ----------------------------------------------------------

    def on_command(self, cmd: dict, now_ms: float) -> list[tuple]:
        name = cmd["cmd"]
        if name == "drive":
            self.ugv.drive(cmd["heading_deg"], cmd["speed_mps"])
            return []
        if name == "pause":
            self.ugv.pause()
            return []
        if name == "resume":
            self.ugv.resume()
            return []
        if name == "calibrate":
            return self._do_calibrate(now_ms)
        if name == "mark_sample":
            return self._do_mark(cmd["label"], now_ms)
        return []

    def _do_calibrate(self, now_ms: float) -> list[tuple]:
        # The simulated wearer stands exactly at the rover, facing north.
        pose = HmdPose(LocalPoint(0.0, 0.0, 0.0),
                       self.config.calibration_yaw_residual_deg)
        self.calib = calibrate(self.ugv.position, pose)
        self.latest_overlay = {}
        return self.core.emit(self._state_envelope(now_ms, event="calibrated"))

    def _world_to_hmd(self, point: GeoPoint) -> LocalPoint:
        enu = geo_to_local(self.calib.p_ref_world, point)
        r = rotate_about_up(enu, self.calib.yaw_at_calibration_deg)
        return LocalPoint(self.calib.p_ref_hmd.east_m + r.east_m,
                          self.calib.p_ref_hmd.north_m + r.north_m, 0.0)

    def _do_mark(self, label: str, now_ms: float) -> list[tuple]:
        if self.calib is None or not self.ugv.paused:
            return self.core.emit(self._event_envelope(
                now_ms, {"mark_rejected": label,
                         "reason": "calibrate first and pause the rover"}))
        self._mark_count += 1
        loc = label or f"M{self._mark_count}"
        hmd_pos = self._world_to_hmd(self.ugv.position)
        rows = []
        for kind in ("GPS", "RTK"):
            overlay = self.latest_overlay.get(kind)
            if overlay is None:
                continue
            sample = record_sample(hmd_pos, overlay, loc, kind, paused=True)
            self.samples.append(sample)
            rows.append({"location_id": sample.location_id,
                         "sensor_kind": sample.sensor_kind,
                         "error_m": sample.error_m,
                         "timestamp_ms": sample.timestamp_ms,
                         "csv": sample.csv_row()})
        env = Envelope(msg_type="SAMPLE_MARK", role="console",
                       sensor_id="harness", seq=self._mark_count,
                       sent_ms=int(now_ms),
                       payload=json.dumps({"label": loc, "rows": rows},
                                          sort_keys=True))
        return self.core.emit(env)

    # -- stepping ----------------------------------------------------------

    def step(self, now_ms: float, dt: float) -> list[tuple]:
        """Advance the rover and push due sensor messages through the core."""
        truth, _ = self.ugv.step(dt)
        effects: list[tuple] = []
        for feed in self.feeds:
            msg = feed.poll(now_ms, truth)
            if msg is None:
                continue
            self._env_seq += 1
            env = Envelope(msg_type="POSITION", role="sensor",
                           sensor_id=msg.sensor_id, seq=msg.seq,
                           sent_ms=msg.timestamp_ms, payload=encode_kml(msg))
            before = self.core.metrics.accepted.get(msg.sensor_id, 0)
            effects += self.core.handle(self._sensor_sids[msg.sensor_id], env, now_ms)
            accepted = self.core.metrics.accepted.get(msg.sensor_id, 0) > before
            if accepted and self.calib is not None:
                self.latest_overlay[msg.kind] = update_overlay(
                    self.calib, msg.position, source_seq=msg.seq,
                    computed_ms=msg.timestamp_ms)
        return effects

    # -- console state -----------------------------------------------------

    def _enu(self, point: GeoPoint):
        ref = self.calib.p_ref_world if self.calib else self.config.station
        p = geo_to_local(ref, point)
        return [round(p.east_m, 4), round(p.north_m, 4)]

    def _state_envelope(self, now_ms: float, event: str = "") -> Envelope:
        state = {
            "paused": self.ugv.paused,
            "calibrated": self.calib is not None,
            "truth_enu": self._enu(self.ugv.position),
            "overlays": {
                kind: [round(o.target_hmd.east_m, 4), round(o.target_hmd.north_m, 4)]
                for kind, o in self.latest_overlay.items()},
            "metrics": self.core.metrics.snapshot(),
            "marks": len(self.samples),
        }
        if event:
            state["event"] = event
        self._env_seq += 1
        return Envelope(msg_type="METRICS", role="console", sensor_id="runtime",
                        seq=self._env_seq, sent_ms=int(now_ms),
                        payload=json.dumps({"state": state}, sort_keys=True))

    def state_effects(self, now_ms: float) -> list[tuple]:
        return self.core.emit(self._state_envelope(now_ms))

    def _event_envelope(self, now_ms: float, payload: dict) -> Envelope:
        self._env_seq += 1
        return Envelope(msg_type="METRICS", role="console", sensor_id="runtime",
                        seq=self._env_seq, sent_ms=int(now_ms),
                        payload=json.dumps(payload, sort_keys=True))

    def samples_csv(self) -> str:
        return samples_to_csv(self.samples)
