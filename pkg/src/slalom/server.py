"""Authoritative realtime session host.

All game state lives behind a single SessionHost that advances one tick at a
time; sockets never touch the simulation directly.  Client messages are
validated, authorized and queued, and each queued influence command is applied
by exactly one tick, so a served session and its headless replay walk the same
path tick for tick.

SessionHost itself is synchronous and transport-free.  The FastAPI layer below
it owns the wall clock: a ticker task per session calls step_once at the
configured rate and fans the outbound frames to per-connection queues.  Ticks
advance simulated time by dt regardless of scheduling jitter, so headless
tests may run the host as fast as they like and get identical logs.
"""
from __future__ import annotations

import asyncio
import os
import secrets
from collections import deque
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, ConfigDict

from .config import GameConfig
from .errors import ConfigError, StateError
from .influence import Command
from .protocol import (
    NOT_ALLOWED,
    PROTOCOL_FAULT,
    ROLE_VIOLATION,
    UNKNOWN_SESSION,
    CommandMessage,
    MessageRejected,
    PauseMessage,
    ResumeMessage,
    ack_message,
    coach_view,
    error_message,
    event_message,
    influencer_view,
    parse_client_message,
    view_message,
)
from .rules import EventKind
from .runner import EPOCH_STAMP, Simulation, make_header
from .sessionlog import EventRecord, SeedBundle, SessionWriter, log_path

DEMO_GAMES = 3


class Role(Enum):
    INFLUENCER = "influencer"
    COACH = "coach"
    OBSERVER = "observer"


class Phase(Enum):
    LOBBY = "lobby"
    HANDS_FREE = "hands_free_demo"
    PLAYING = "playing"
    PAUSED = "paused"
    ENDED = "ended"


# (connection id, wire text) pairs ready for the transport to deliver.
Outbound = list[tuple[int, str]]


class SessionHost:
    """One session's state machine: roles, phases, command queue, tick, log."""

    def __init__(
        self,
        config: GameConfig,
        seeds: SeedBundle,
        session_id: str,
        *,
        level: int = 1,
        log_path: str | os.PathLike | None = None,
        created: str = EPOCH_STAMP,
        demo_games: int = DEMO_GAMES,
    ):
        self.sim = Simulation(config, seeds, level=level)
        self.session_id = session_id
        self.phase = Phase.LOBBY
        self.demo_remaining = demo_games
        self._resume_to: Phase | None = None
        self._queue: deque[tuple[int | None, Command]] = deque()
        self._conns: dict[int, Role] = {}
        self._next_conn = 1
        self.writer: SessionWriter | None = None
        if log_path is not None:
            header = make_header(
                session_id, config, seeds, created=created, start_level=level,
                start_influences=self.sim.influences,
            )
            self.writer = SessionWriter(log_path, header)

    # -- bookkeeping ----------------------------------------------------------

    @property
    def tick_index(self) -> int:
        return self.sim.state.step_index

    def _role_taken(self, role: Role) -> bool:
        return any(r is role for r in self._conns.values())

    def _broadcast(self, text: str) -> Outbound:
        return [(conn_id, text) for conn_id in sorted(self._conns)]

    def _note_event(self, kind: EventKind) -> Outbound:
        """Log a lifecycle event at the current tick and tell every client."""
        record = EventRecord(step=self.tick_index, kind=kind)
        if self.writer is not None:
            self.writer.append_event(record)
        return self._broadcast(event_message(record).wire())

    # -- roles ------------------------------------------------------------------

    def join(self, requested: str | None) -> tuple[int, Role, Outbound]:
        """Attach a connection; may start the hands-free demo."""
        if self.phase is Phase.ENDED:
            raise MessageRejected(NOT_ALLOWED, "session has ended")
        if requested is None:
            if not self._role_taken(Role.INFLUENCER):
                role = Role.INFLUENCER
            elif not self._role_taken(Role.COACH):
                role = Role.COACH
            else:
                role = Role.OBSERVER
        else:
            try:
                role = Role(requested)
            except ValueError:
                raise MessageRejected(
                    PROTOCOL_FAULT, f"unknown role {requested!r}", field="role"
                ) from None
            if role is not Role.OBSERVER and self._role_taken(role):
                raise MessageRejected(ROLE_VIOLATION, f"{role.value} seat is taken")
        conn_id = self._next_conn
        self._next_conn += 1
        self._conns[conn_id] = role
        out: Outbound = [
            (conn_id, ack_message(self.tick_index, None, self.tick_index, role=role.value).wire())
        ]
        if (
            self.phase is Phase.LOBBY
            and self._role_taken(Role.INFLUENCER)
            and self._role_taken(Role.COACH)
        ):
            # demo_games=0 skips the watch-first demo entirely.
            if self.demo_remaining > 0:
                self.phase = Phase.HANDS_FREE
                out.extend(self._note_event(EventKind.HANDS_FREE_STARTED))
            else:
                self.phase = Phase.PLAYING
        return conn_id, role, out

    def leave(self, conn_id: int) -> Outbound:
        """Detach a connection; a vanished influencer pauses the game."""
        role = self._conns.pop(conn_id, None)
        if role is Role.INFLUENCER and self.phase in (Phase.HANDS_FREE, Phase.PLAYING):
            return self._pause()
        return []

    # -- messages ---------------------------------------------------------------

    def handle(self, conn_id: int, text: str) -> Outbound:
        """Validate, authorize and act on one wire message from a client."""
        role = self._conns.get(conn_id)
        if role is None:
            raise StateError(f"message from unknown connection {conn_id}")
        try:
            msg = parse_client_message(text)
        except MessageRejected as exc:
            return [(conn_id, error_message(self.tick_index, exc.code, str(exc), exc.field).wire())]
        if self.phase is Phase.ENDED:
            return self._reject(conn_id, NOT_ALLOWED, "session has ended")
        if isinstance(msg, CommandMessage):
            return self._handle_command(conn_id, role, msg)
        if isinstance(msg, PauseMessage):
            return self._handle_pause(conn_id, role, msg)
        assert isinstance(msg, ResumeMessage)
        return self._handle_resume(conn_id, role, msg)

    def _reject(self, conn_id: int, code: str, message: str) -> Outbound:
        return [(conn_id, error_message(self.tick_index, code, message).wire())]

    def _ack(self, conn_id: int, seq: int | None, effective: int) -> Outbound:
        return [(conn_id, ack_message(self.tick_index, seq, effective).wire())]

    def _handle_command(self, conn_id: int, role: Role, msg: CommandMessage) -> Outbound:
        if role is not Role.INFLUENCER:
            return self._reject(conn_id, ROLE_VIOLATION, "only the influencer may steer the circles")
        phase = self._resume_to if self.phase is Phase.PAUSED else self.phase
        if phase is Phase.LOBBY:
            return self._reject(conn_id, NOT_ALLOWED, "the session has not started")
        if phase is Phase.HANDS_FREE:
            return self._reject(conn_id, NOT_ALLOWED, "commands are disabled during the hands-free demo")
        # Applied by exactly one future tick, FIFO; the ack names that tick.
        effective = self.tick_index + len(self._queue) + 1
        self._queue.append((msg.seq, msg.to_command()))
        return self._ack(conn_id, msg.seq, effective)

    def _handle_pause(self, conn_id: int, role: Role, msg: PauseMessage) -> Outbound:
        if role is Role.OBSERVER:
            return self._reject(conn_id, ROLE_VIOLATION, "observers cannot pause the game")
        if self.phase in (Phase.HANDS_FREE, Phase.PLAYING):
            return self._ack(conn_id, msg.seq, self.tick_index) + self._pause()
        if self.phase is Phase.PAUSED:
            return self._ack(conn_id, msg.seq, self.tick_index)
        return self._reject(conn_id, NOT_ALLOWED, "no game to pause")

    def _handle_resume(self, conn_id: int, role: Role, msg: ResumeMessage) -> Outbound:
        if role is Role.OBSERVER:
            return self._reject(conn_id, ROLE_VIOLATION, "observers cannot resume the game")
        if self.phase is Phase.PAUSED:
            assert self._resume_to is not None
            self.phase = self._resume_to
            self._resume_to = None
            return self._ack(conn_id, msg.seq, self.tick_index) + self._note_event(EventKind.RESUMED)
        if self.phase in (Phase.HANDS_FREE, Phase.PLAYING):
            return self._ack(conn_id, msg.seq, self.tick_index)
        return self._reject(conn_id, NOT_ALLOWED, "no game to resume")

    def _pause(self) -> Outbound:
        self._resume_to = self.phase
        self.phase = Phase.PAUSED
        return self._note_event(EventKind.PAUSED)

    # -- ticking ----------------------------------------------------------------

    def step_once(self) -> Outbound:
        """One authoritative tick: apply a command, advance, log, broadcast."""
        if self.phase not in (Phase.HANDS_FREE, Phase.PLAYING):
            return []
        command: Command | None = None
        if self.phase is Phase.PLAYING and self._queue:
            _, command = self._queue.popleft()
        out_tick = self.sim.tick(command)
        record = out_tick.record
        events = [EventRecord.of(record.step, ev) for ev in out_tick.events]
        if self.writer is not None:
            self.writer.append_step(record)
            for ev in events:
                self.writer.append_event(ev)

        out: Outbound = []
        inf_payload = influencer_view(self.sim.state, self.sim.influences, self.sim.level)
        coach_payload = coach_view(self.sim.state, self.sim.game)
        for conn_id in sorted(self._conns):
            payload = inf_payload if self._conns[conn_id] is Role.INFLUENCER else coach_payload
            out.append((conn_id, view_message(record.step, payload).wire()))
        for ev in events:
            out.extend(self._broadcast(event_message(ev).wire()))

        if out_tick.terminal is not None and self.phase is Phase.HANDS_FREE:
            self.demo_remaining -= 1
            if self.demo_remaining == 0:
                self.phase = Phase.PLAYING
                out.extend(self._note_event(EventKind.HANDS_FREE_ENDED))
        return out

    # -- lifecycle ----------------------------------------------------------------

    def close(self) -> None:
        if self.phase is Phase.ENDED:
            return
        self.phase = Phase.ENDED
        if self.writer is not None:
            self.writer.close()

    def status(self) -> dict:
        observers = sum(1 for r in self._conns.values() if r is Role.OBSERVER)
        return {
            "session_id": self.session_id,
            "phase": self.phase.value,
            "tick": self.tick_index,
            "level": self.sim.level,
            "score": self.sim.game.score if self.sim.game else 0,
            "best": self.sim.game.best_score if self.sim.game else 0,
            "demo_remaining": self.demo_remaining,
            "roles": {
                "influencer": self._role_taken(Role.INFLUENCER),
                "coach": self._role_taken(Role.COACH),
                "observers": observers,
            },
        }


# --- transport layer -------------------------------------------------------------


@dataclass(slots=True)
class ServerSettings:
    config: GameConfig
    log_dir: str = "logs"
    tick_hz: float = 0.0  # 0 means one tick per physics dt
    demo_games: int = DEMO_GAMES


@dataclass
class _Runtime:
    host: SessionHost
    queues: dict[int, asyncio.Queue] = field(default_factory=dict)
    ticker: asyncio.Task | None = None

    def route(self, outbound: Outbound) -> None:
        for conn_id, text in outbound:
            queue = self.queues.get(conn_id)
            if queue is not None:
                queue.put_nowait(text)


class CreateSessionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str | None = None
    seed: int | None = None
    level: int = 1


def _utc_stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def create_app(settings: ServerSettings) -> FastAPI:
    settings.config.validate()
    runtimes: dict[str, _Runtime] = {}
    period = 1.0 / settings.tick_hz if settings.tick_hz > 0 else settings.config.physics.dt

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for runtime in runtimes.values():
            if runtime.ticker is not None:
                runtime.ticker.cancel()
            runtime.host.close()

    app = FastAPI(title="cartpole-slalom", lifespan=lifespan)

    async def _ticker(runtime: _Runtime) -> None:
        loop = asyncio.get_running_loop()
        next_time = loop.time() + period
        while True:
            delay = next_time - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                # Behind schedule (or unpaced): yield, then catch up from now.
                await asyncio.sleep(0)
                next_time = loop.time()
            next_time += period
            runtime.route(runtime.host.step_once())

    @app.post("/session", status_code=201)
    async def create_session(req: CreateSessionRequest) -> dict:
        session_id = req.id if req.id is not None else secrets.token_hex(4)
        if session_id in runtimes:
            raise HTTPException(status_code=409, detail=f"session {session_id!r} already exists")
        seed = req.seed if req.seed is not None else secrets.randbits(32)
        os.makedirs(settings.log_dir, exist_ok=True)
        try:
            host = SessionHost(
                settings.config,
                SeedBundle.from_root(seed),
                session_id,
                level=req.level,
                log_path=log_path(settings.log_dir, session_id),
                created=_utc_stamp(),
                demo_games=settings.demo_games,
            )
        except (ConfigError, StateError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        runtime = _Runtime(host=host)
        runtimes[session_id] = runtime
        runtime.ticker = asyncio.get_running_loop().create_task(_ticker(runtime))
        return {"id": session_id, "seed": seed, "level": req.level}

    @app.get("/session/{session_id}")
    async def session_status(session_id: str) -> dict:
        runtime = runtimes.get(session_id)
        if runtime is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return runtime.host.status()

    async def _pump(queue: asyncio.Queue, socket: WebSocket) -> None:
        while True:
            await socket.send_text(await queue.get())

    async def _serve_socket(socket: WebSocket, session_id: str, role: str | None) -> None:
        await socket.accept()
        runtime = runtimes.get(session_id)
        if runtime is None:
            await socket.send_text(
                error_message(0, UNKNOWN_SESSION, f"no session {session_id!r}").wire()
            )
            await socket.close()
            return
        host = runtime.host
        try:
            conn_id, _, outbound = host.join(role)
        except MessageRejected as exc:
            await socket.send_text(
                error_message(host.tick_index, exc.code, str(exc), exc.field).wire()
            )
            await socket.close()
            return
        queue: asyncio.Queue = asyncio.Queue()
        runtime.queues[conn_id] = queue
        runtime.route(outbound)
        sender = asyncio.get_running_loop().create_task(_pump(queue, socket))
        try:
            while True:
                text = await socket.receive_text()
                runtime.route(host.handle(conn_id, text))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            runtime.queues.pop(conn_id, None)
            runtime.route(host.leave(conn_id))

    @app.websocket("/session/{session_id}/join")
    async def join_socket(
        socket: WebSocket, session_id: str, role: str | None = Query(default=None)
    ) -> None:
        await _serve_socket(socket, session_id, role)

    @app.websocket("/session/{session_id}/watch")
    async def watch_socket(socket: WebSocket, session_id: str) -> None:
        await _serve_socket(socket, session_id, Role.OBSERVER.value)

    return app
