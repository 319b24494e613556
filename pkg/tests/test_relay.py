"""RelayCore behavior with a fake clock: throttle, routing, ordering, metrics."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtkar.envelope import Envelope, EnvelopeError, parse_command
from rtkar.geodesy import GeoPoint
from rtkar.kml import SensorMessage, encode_kml
from rtkar.relay import ProtocolError, RelayCore


def position_env(sensor_id="rtk-rover", seq=1, ts=0, kind="RTK"):
    msg = SensorMessage(sensor_id, kind, seq, ts, GeoPoint(49.5, 6.36), "FIXED")
    return Envelope(msg_type="POSITION", role="sensor", sensor_id=sensor_id,
                    seq=seq, sent_ms=ts, payload=encode_kml(msg))


def make_core(min_interval=100.0, hmds=1, consoles=0):
    core = RelayCore(min_interval_ms=min_interval)
    core.register("sensor-1", "sensor")
    for i in range(hmds):
        core.register(f"hmd-{i}", "hmd")
    for i in range(consoles):
        core.register(f"console-{i}", "console")
    return core


def delivered(effects):
    return [e for e in effects if e[0] == "deliver"]


class TestRegistry:
    def test_unknown_role(self):
        with pytest.raises(ProtocolError):
            RelayCore().register("x", "pilot")

    def test_duplicate_sid(self):
        core = RelayCore()
        core.register("x", "hmd")
        with pytest.raises(ProtocolError):
            core.register("x", "hmd")

    def test_unregistered_session_closed(self):
        core = RelayCore()
        effects = core.handle("ghost", position_env(), 0.0)
        assert effects[0][0] == "close"


class TestIngestPosition:
    def test_single_message_broadcast_intact(self):
        core = make_core(hmds=2, consoles=1)
        env = position_env()
        effects = delivered(core.handle("sensor-1", env, 0.0))
        assert len(effects) == 3
        # payload transparency: identical bytes
        assert all(e[2].payload == env.payload for e in effects)

    def test_throttle_10_per_second(self):
        core = make_core(min_interval=100.0)
        accepted = 0
        for i in range(100):  # every 10 ms for 1 s
            env = position_env(seq=i + 1, ts=i * 10)
            if delivered(core.handle("sensor-1", env, i * 10.0)):
                accepted += 1
        assert 9 <= accepted <= 11
        assert core.metrics.dropped["rtk-rover"] == 100 - accepted

    def test_throttle_disabled(self):
        core = make_core(min_interval=0.0)
        for i in range(50):
            assert delivered(core.handle("sensor-1", position_env(seq=i + 1), float(i)))

    def test_throttle_gap_invariant(self):
        core = make_core(min_interval=100.0)
        rng = np.random.default_rng(0)
        t = 0.0
        accepted_at = []
        for i in range(1000):
            t += float(rng.uniform(0, 40))
            if delivered(core.handle("sensor-1", position_env(seq=i + 1), t)):
                accepted_at.append(t)
        gaps = np.diff(accepted_at)
        assert (gaps >= 100.0).all()

    def test_undecodable_payload_nacked(self):
        core = make_core()
        env = Envelope(msg_type="POSITION", role="sensor", sensor_id="rtk-rover",
                       seq=1, payload="<kml>not really")
        effects = core.handle("sensor-1", env, 0.0)
        assert effects[0][0] == "reply"
        assert "nack" in effects[0][2].payload
        assert core.metrics.nacks == 1

    def test_position_from_hmd_rejected(self):
        core = make_core()
        effects = core.handle("hmd-0", position_env(), 0.0)
        assert effects[0][0] == "reply"
        assert "nack" in effects[0][2].payload

    def test_non_increasing_seq_nacked(self):
        core = make_core(min_interval=0.0)
        core.handle("sensor-1", position_env(seq=5), 0.0)
        effects = core.handle("sensor-1", position_env(seq=5), 1.0)
        assert effects[0][0] == "reply"

    def test_zero_subscribers_no_error(self):
        core = RelayCore(min_interval_ms=0.0)
        core.register("sensor-1", "sensor")
        assert core.handle("sensor-1", position_env(), 0.0) == []

    @given(st.lists(st.sampled_from(["A", "B"]), min_size=1, max_size=200))
    @settings(max_examples=50, deadline=None)
    def test_per_sensor_fifo(self, order):
        core = RelayCore(min_interval_ms=0.0)
        core.register("sa", "sensor")
        core.register("sb", "sensor")
        core.register("hmd-0", "hmd")
        seqs = {"A": 0, "B": 0}
        seen = {"A": [], "B": []}
        for which in order:
            seqs[which] += 1
            sid = "sa" if which == "A" else "sb"
            env = position_env(sensor_id=which, seq=seqs[which], kind="GPS")
            for eff in delivered(core.handle(sid, env, 0.0)):
                seen[eff[2].sensor_id].append(eff[2].seq)
        for which in ("A", "B"):
            assert seen[which] == sorted(seen[which])


class TestCommands:
    def test_parse_commands(self):
        assert parse_command("drive 0 1.0") == {"cmd": "drive", "heading_deg": 0.0,
                                                "speed_mps": 1.0}
        assert parse_command("pause") == {"cmd": "pause"}
        assert parse_command("mark_sample L3") == {"cmd": "mark_sample", "label": "L3"}
        with pytest.raises(EnvelopeError):
            parse_command("warp 9")

    def test_command_routed_to_sink(self):
        core = make_core(consoles=1)
        env = Envelope(msg_type="COMMAND", role="console", payload="pause")
        effects = core.handle("console-0", env, 0.0)
        assert ("command", {"cmd": "pause"}) in effects

    def test_unknown_command_nacked(self):
        core = make_core(consoles=1)
        env = Envelope(msg_type="COMMAND", role="console", payload="teleport")
        effects = core.handle("console-0", env, 0.0)
        assert effects[0][0] == "reply"
        assert "nack" in effects[0][2].payload

    def test_command_from_sensor_rejected(self):
        core = make_core()
        env = Envelope(msg_type="COMMAND", role="sensor", payload="pause")
        assert core.handle("sensor-1", env, 0.0)[0][0] == "reply"

    def test_mark_sample_broadcast_to_subscribers(self):
        core = make_core(hmds=1, consoles=2)
        env = Envelope(msg_type="COMMAND", role="console", payload="mark_sample L3")
        effects = core.handle("console-0", env, 0.0)
        targets = {e[1] for e in delivered(effects)}
        assert targets == {"hmd-0", "console-1"}
        assert ("command", {"cmd": "mark_sample", "label": "L3"}) in effects

    def test_drive_command_values(self):
        cmd = parse_command("drive 0 1.0")
        assert cmd["heading_deg"] == 0.0 and cmd["speed_mps"] == 1.0


class TestMetrics:
    def test_fresh_server_all_zero(self):
        snap = RelayCore().metrics.snapshot()
        assert snap["accepted"] == {} and snap["dropped"] == {}
        assert snap["nacks"] == 0
        assert snap["latency_ms"]["count"] == 0

    def test_drop_arithmetic(self):
        core = make_core(min_interval=100.0)
        for i in range(100):
            core.handle("sensor-1", position_env(seq=i + 1), i * 10.0)
        snap = core.metrics.snapshot()
        assert snap["accepted"]["rtk-rover"] + snap["dropped"]["rtk-rover"] == 100
        assert snap["dropped"]["rtk-rover"] == 90

    def test_metrics_request(self):
        core = make_core(consoles=1)
        env = Envelope(msg_type="METRICS", role="console")
        effects = core.handle("console-0", env, 0.0)
        assert effects[0][0] == "reply"
        payload = json.loads(effects[0][2].payload)
        assert "accepted" in payload and "latency_ms" in payload
