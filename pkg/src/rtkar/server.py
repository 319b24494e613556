"""Asyncio transports for the relay: TCP stream and browser WebSocket.

Both endpoints speak the identical newline-delimited envelope protocol (the
WebSocket carries one envelope per text frame). Each session gets a bounded
outbound queue pumped by its own task, so one slow subscriber can never stall
ingest or other subscribers; overflowing the bound disconnects the session.
"""

from __future__ import annotations

import asyncio
import itertools
import json
import time

import websockets

from .envelope import Envelope, EnvelopeError
from .relay import RelayCore
from .runtime import ScenarioRuntime

DEFAULT_PORT = 4710
DEFAULT_WS_PORT = 4711
DEFAULT_QUEUE_BOUND = 256
HELLO_TIMEOUT_S = 5.0


class _Session:
    def __init__(self, sid: str, send, close, queue_bound: int):
        self.sid = sid
        self.queue: asyncio.Queue = asyncio.Queue(maxsize=queue_bound)
        self.send = send        # async (str) -> None
        self.close = close      # async () -> None
        self.pump_task: asyncio.Task | None = None


class RelayServer:
    def __init__(self, *, host: str = "127.0.0.1", port: int = DEFAULT_PORT,
                 ws_port: int | None = DEFAULT_WS_PORT,
                 min_interval_ms: float = 100.0,
                 queue_bound: int = DEFAULT_QUEUE_BOUND,
                 metrics_interval_s: float = 0.0,
                 runtime_config=None,
                 hello_timeout_s: float = HELLO_TIMEOUT_S):
        self.core = RelayCore(min_interval_ms=min_interval_ms)
        self.host = host
        self.port = port
        self.ws_port = ws_port
        self.queue_bound = queue_bound
        self.metrics_interval_s = metrics_interval_s
        self.hello_timeout_s = hello_timeout_s
        self.runtime = (ScenarioRuntime(self.core, runtime_config)
                        if runtime_config is not None else None)
        self._sessions: dict[str, _Session] = {}
        self._sid_counter = itertools.count(1)
        self._tcp_server = None
        self._ws_server = None
        self._tasks: list[asyncio.Task] = []

    # -- lifecycle ---------------------------------------------------------

    async def start(self):
        self._tcp_server = await asyncio.start_server(
            self._handle_tcp, self.host, self.port)
        if self.ws_port is not None:
            self._ws_server = await websockets.serve(
                self._handle_ws, self.host, self.ws_port)
        if self.runtime is not None:
            self._tasks.append(asyncio.create_task(self._runtime_loop()))
        if self.metrics_interval_s > 0:
            self._tasks.append(asyncio.create_task(self._metrics_loop()))

    async def stop(self):
        for task in self._tasks:
            task.cancel()
        for session in list(self._sessions.values()):
            await self._drop_session(session)
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()

    @property
    def tcp_port(self) -> int:
        return self._tcp_server.sockets[0].getsockname()[1]

    @property
    def websocket_port(self) -> int:
        return next(iter(self._ws_server.sockets)).getsockname()[1]

    def now_ms(self) -> float:
        return time.monotonic() * 1000.0

    # -- effect execution --------------------------------------------------

    def _execute(self, effects, ingest_ms: float):
        for effect in effects:
            kind = effect[0]
            if kind in ("deliver", "reply"):
                _, sid, env = effect
                session = self._sessions.get(sid)
                if session is None:
                    continue
                try:
                    session.queue.put_nowait((env.to_line(), ingest_ms))
                except asyncio.QueueFull:
                    # Slow consumer: protect broadcast latency for the rest.
                    asyncio.ensure_future(self._drop_session(session))
            elif kind == "command":
                if self.runtime is not None:
                    self._execute(self.runtime.on_command(effect[1], ingest_ms),
                                  ingest_ms)
            elif kind == "close":
                session = self._sessions.get(effect[1])
                if session is not None:
                    asyncio.ensure_future(self._drop_session(session))

    async def _drop_session(self, session: _Session):
        self._sessions.pop(session.sid, None)
        self.core.unregister(session.sid)
        if session.pump_task is not None:
            session.pump_task.cancel()
        try:
            await session.close()
        except Exception:
            pass

    async def _pump(self, session: _Session):
        while True:
            line, ingest_ms = await session.queue.get()
            try:
                await session.send(line)
            except Exception:
                await self._drop_session(session)
                return
            self.core.metrics.latency_ms.append(self.now_ms() - ingest_ms)

    # -- shared session protocol -------------------------------------------

    async def _run_session(self, recv_line, send, close, label: str):
        """recv_line: async -> str | None (None on EOF)."""
        sid = f"{label}-{next(self._sid_counter)}"
        try:
            first = await asyncio.wait_for(recv_line(), self.hello_timeout_s)
        except (asyncio.TimeoutError, Exception):
            await _quiet_close(close)
            return
        try:
            env = Envelope.from_line(first) if first is not None else None
        except EnvelopeError:
            env = None
        if env is None or env.msg_type != "HELLO":
            try:
                notice = Envelope(msg_type="METRICS", role="console",
                                  sensor_id="server",
                                  payload=json.dumps({"nack": "HELLO required first"}))
                await send(notice.to_line())
            except Exception:
                pass
            await _quiet_close(close)
            return
        try:
            self.core.register(sid, env.role)
        except Exception:
            await _quiet_close(close)
            return

        session = _Session(sid, send, close, self.queue_bound)
        self._sessions[sid] = session
        session.pump_task = asyncio.create_task(self._pump(session))
        try:
            while True:
                line = await recv_line()
                if line is None:
                    break
                line = line.strip()
                if not line:
                    continue
                now = self.now_ms()
                try:
                    incoming = Envelope.from_line(line)
                except EnvelopeError as exc:
                    self.core.metrics.nacks += 1
                    notice = Envelope(msg_type="METRICS", role="console",
                                      sensor_id="server",
                                      payload=json.dumps({"nack": str(exc)}))
                    self._execute([("reply", sid, notice)], now)
                    continue
                self._execute(self.core.handle(sid, incoming, now), now)
        except (ConnectionError, websockets.ConnectionClosed):
            pass
        finally:
            await self._drop_session(session)

    async def _handle_tcp(self, reader: asyncio.StreamReader,
                          writer: asyncio.StreamWriter):
        async def recv_line():
            data = await reader.readline()
            return None if not data else data.decode("utf-8", errors="replace")

        async def send(line: str):
            writer.write(line.encode())
            await writer.drain()

        async def close():
            writer.close()
            try:
                await writer.wait_closed()
            except Exception:
                pass

        await self._run_session(recv_line, send, close, "tcp")

    async def _handle_ws(self, websocket):
        async def recv_line():
            try:
                msg = await websocket.recv()
            except websockets.ConnectionClosed:
                return None
            return msg if isinstance(msg, str) else msg.decode("utf-8", "replace")

        async def send(line: str):
            await websocket.send(line.rstrip("\n"))

        await self._run_session(recv_line, send, websocket.close, "ws")

    # -- background loops --------------------------------------------------

    async def _runtime_loop(self, dt: float = 0.1):
        state_every = 5  # broadcast console state at ~2 Hz
        tick = 0
        while True:
            now = self.now_ms()
            self._execute(self.runtime.step(now, dt), now)
            tick += 1
            if tick % state_every == 0:
                self._execute(self.runtime.state_effects(now), now)
            await asyncio.sleep(dt)

    async def _metrics_loop(self):
        while True:
            await asyncio.sleep(self.metrics_interval_s)
            now = self.now_ms()
            snap = self.core.metrics.snapshot(
                {s.sid: s.queue.qsize() for s in self._sessions.values()})
            env = Envelope(msg_type="METRICS", role="console", sensor_id="server",
                           sent_ms=int(now),
                           payload=json.dumps({"metrics": snap}, sort_keys=True))
            self._execute(self.core.emit(env), now)


async def _quiet_close(close):
    try:
        await close()
    except Exception:
        pass
