"""HTTP + WebSocket service exposing live sessions to clients (see docs/api.md).

Each session gets a background ticker that advances playback in real time and
is the sole broadcaster to WebSocket subscribers: every cycle it pushes any
new log events (in log order, with strictly increasing sequence numbers) and
one interpolated executor-state snapshot.  Commands serialize against the
ticker through a per-session lock, so playback is effectively paused while an
utterance is being interpreted, which is the intended contract.

With the mock backend the service is fully offline.
"""

from __future__ import annotations

import asyncio
import threading
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from .files import params_from_mapping
from .interpreter import LlmBackend, MockBackend, PromptTemplates, ScriptedBackend
from .modify import ApplyParams
from .session import Mode, Phase, Session, SessionError
from .trajectory import LandmarkSet, Trajectory, trajectory_hash

DEFAULT_BROADCAST_HZ = 20.0


@dataclass(frozen=True)
class ServiceConfig:
    """Service-wide settings; exactly one interpreter backend is selected."""

    listen: str = "127.0.0.1:8080"
    backend: str = "mock"  # llm | mock | scripted
    replies: dict[str, str] = dataclass_field(default_factory=dict)
    params: ApplyParams = dataclass_field(default_factory=ApplyParams)
    prompt_path: Optional[str] = None
    clarification_prompt_path: Optional[str] = None
    broadcast_hz: float = DEFAULT_BROADCAST_HZ
    log_dir: Optional[str] = None

    def make_backend(self):
        if self.backend == "mock":
            return MockBackend()
        if self.backend == "scripted":
            return ScriptedBackend(self.replies)
        if self.backend == "llm":
            return LlmBackend.from_env()
        raise ValueError(f"unknown backend {self.backend!r}")

    def templates(self) -> Optional[PromptTemplates]:
        if self.prompt_path or self.clarification_prompt_path:
            return PromptTemplates.load(self.prompt_path, self.clarification_prompt_path)
        return None


class WaypointIn(BaseModel):
    t: float
    pos: list[float] = Field(min_length=3, max_length=3)
    vel: float
    force: float


class SessionCreate(BaseModel):
    mode: str
    trajectory: list[WaypointIn]
    landmarks: dict[str, list[float]]
    params: Optional[dict[str, float]] = None
    pause_s: Optional[float] = None


class TextIn(BaseModel):
    text: str


class _Runtime:
    """One live session plus its fan-out state."""

    def __init__(self, session: Session, log_path: Optional[Path]):
        self.session = session
        self.lock = threading.Lock()
        self.queues: set[asyncio.Queue] = set()
        self.broadcast_seq = 0  # next event index to push
        self.last_tick = time.monotonic()
        self.log_path = log_path
        self.logged_seq = 0
        self.ticker: Optional[asyncio.Task] = None


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    templates = config.templates()
    sessions: dict[str, _Runtime] = {}

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        for runtime in sessions.values():
            if runtime.ticker is not None:
                runtime.ticker.cancel()

    app = FastAPI(title="trajtalk", version="0.1.0", lifespan=lifespan)
    app.state.sessions = sessions
    app.state.config = config

    def runtime_for(session_id: str) -> _Runtime:
        runtime = sessions.get(session_id)
        if runtime is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return runtime

    def flush_log(runtime: _Runtime) -> None:
        if runtime.log_path is None:
            return
        events = runtime.session.events
        if runtime.logged_seq >= len(events):
            return
        with open(runtime.log_path, "a", encoding="utf-8") as fh:
            for event in events[runtime.logged_seq:]:
                fh.write(event.to_json() + "\n")
        runtime.logged_seq = len(events)

    def broadcast_pending(runtime: _Runtime) -> None:
        """Push new events then a state snapshot to every subscriber (loop thread only)."""
        events = runtime.session.events
        messages = [
            {"type": "event", "event": events[i].to_dict()}
            for i in range(runtime.broadcast_seq, len(events))
        ]
        runtime.broadcast_seq = len(events)
        messages.append({"type": "state", "state": runtime.session.state()})
        for queue in list(runtime.queues):
            for message in messages:
                queue.put_nowait(message)

    async def ticker(session_id: str, runtime: _Runtime) -> None:
        period = 1.0 / config.broadcast_hz
        try:
            while session_id in sessions:
                await asyncio.sleep(period)
                acquired = runtime.lock.acquire(blocking=False)
                if not acquired:
                    continue  # a command is in flight; playback is paused
                try:
                    now = time.monotonic()
                    dt = now - runtime.last_tick
                    runtime.last_tick = now
                    if dt > 0 and runtime.session.phase in (Phase.RUNNING, Phase.PAUSED):
                        runtime.session.tick(dt)
                    flush_log(runtime)
                    broadcast_pending(runtime)
                finally:
                    runtime.lock.release()
        except asyncio.CancelledError:
            pass

    @app.post("/sessions", status_code=201)
    async def create_session(body: SessionCreate):
        try:
            mode = Mode(body.mode)
        except ValueError:
            raise HTTPException(
                status_code=422,
                detail=f"mode must be one of {[m.value for m in Mode]}, got {body.mode!r}",
            ) from None
        try:
            traj = Trajectory.from_records([wp.model_dump() for wp in body.trajectory])
            lms = LandmarkSet.from_dict(body.landmarks)
            params = params_from_mapping(body.params, config.params)
            kwargs = {}
            if body.pause_s is not None:
                kwargs["pause_s"] = body.pause_s
            session = Session(
                traj, lms, mode, config.make_backend(), params, templates=templates, **kwargs
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        session_id = uuid.uuid4().hex[:12]
        log_path = None
        if config.log_dir:
            log_path = Path(config.log_dir) / f"session-{session_id}.jsonl"
            log_path.parent.mkdir(parents=True, exist_ok=True)
        runtime = _Runtime(session, log_path)
        sessions[session_id] = runtime
        runtime.ticker = asyncio.get_running_loop().create_task(ticker(session_id, runtime))
        return {"id": session_id, "state": session.state()}

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        runtime = runtime_for(session_id)
        with runtime.lock:
            return runtime.session.state()

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str):
        runtime = runtime_for(session_id)
        with runtime.lock:
            return {"events": [e.to_dict() for e in runtime.session.events]}

    @app.get("/sessions/{session_id}/trajectory")
    def get_trajectory(session_id: str):
        """Geometry for clients: polylines plus the hash they correspond to."""
        runtime = runtime_for(session_id)
        with runtime.lock:
            session = runtime.session
            return {
                "trajectory_hash": trajectory_hash(session.current),
                "current": session.current.to_records(),
                "original": session.original.to_records(),
                "landmarks": session.lms.to_dict(),
            }

    def _command(session_id: str, fn):
        runtime = runtime_for(session_id)
        with runtime.lock:
            try:
                result = fn(runtime.session)
            except SessionError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from None
            flush_log(runtime)
            return result

    @app.post("/sessions/{session_id}/utterance")
    def post_utterance(session_id: str, body: TextIn):
        outcome = _command(session_id, lambda s: s.submit_utterance(body.text))
        return {"feedback": outcome.feedback, "modified": outcome.modified, "phase": outcome.phase.value}

    @app.post("/sessions/{session_id}/clarification")
    def post_clarification(session_id: str, body: TextIn):
        outcome = _command(session_id, lambda s: s.answer_clarification(body.text))
        return {"feedback": outcome.feedback, "modified": outcome.modified, "phase": outcome.phase.value}

    @app.post("/sessions/{session_id}/stop")
    def post_stop(session_id: str):
        phase = _command(session_id, lambda s: s.stop())
        return {"phase": phase.value}

    @app.websocket("/sessions/{session_id}/events")
    async def events_socket(websocket: WebSocket, session_id: str):
        runtime = sessions.get(session_id)
        if runtime is None:
            await websocket.close(code=4404, reason=f"unknown session {session_id!r}")
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        # Catch existing subscribers up, then hand this one the full backlog,
        # so the shared broadcast pointer stays consistent for everyone.
        with runtime.lock:
            broadcast_pending(runtime)
            for event in runtime.session.events:
                queue.put_nowait({"type": "event", "event": event.to_dict()})
            queue.put_nowait({"type": "state", "state": runtime.session.state()})
            runtime.queues.add(queue)
        try:
            while True:
                message = await queue.get()
                await websocket.send_json(message)
        except WebSocketDisconnect:
            pass
        finally:
            runtime.queues.discard(queue)

    return app
