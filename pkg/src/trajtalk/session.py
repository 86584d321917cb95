"""Time-stepped playback with the pause-interpret-apply/clarify-resume loop.

A session owns one trajectory and advances along it via :meth:`Session.tick`.
Utterances pause playback, go through the interpreter, and - depending on the
communication mode - apply cumulative changes, pose a clarifying question, or
do nothing:

* ``bidirectional`` - changes are applied and assured verbally; unclear
  utterances open a clarification exchange that blocks playback until
  answered;
* ``unidirectional`` - the same changes are applied but nothing is ever said;
  unclear utterances just pause and resume;
* ``no_modification`` - the session pauses for a fixed interval and resumes
  its original path untouched.

Every step appends to an ordered event log used by the analytics and the
service's WebSocket stream.  A session has a single logical owner: callers
must serialize commands (the HTTP service does so with a per-session lock);
distinct sessions are fully independent.
"""

from __future__ import annotations

import json
import logging
import time
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from .analytics import LatencyStats, StepCurve, ccdf_remaining, latency_stats
from .interpreter import (
    BackendError,
    ConversationTurn,
    History,
    InterpreterBackend,
    InterpreterReply,
    PendingClarification,
    PromptTemplates,
    interpret,
    interpret_clarification,
)
from .modify import DEFAULT_PARAMS, ApplyParams, apply
from .schema import ReplyFormatError, serialize_spec
from .trajectory import (
    DEFAULT_PROXIMITY_THRESHOLD,
    LandmarkSet,
    Trajectory,
    interpolate_state,
    trajectory_hash,
    validate,
)

logger = logging.getLogger(__name__)

# Fixed pause for the no-modification mode, mirroring the mean end-to-end
# modification latency so baseline timing feels like the interpreting modes.
DEFAULT_PAUSE_S = 1.7


class Mode(str, Enum):
    BIDIRECTIONAL = "bidirectional"
    UNIDIRECTIONAL = "unidirectional"
    NO_MODIFICATION = "no_modification"


class Phase(str, Enum):
    RUNNING = "running"
    PAUSED = "paused"
    AWAITING_CLARIFICATION = "awaiting_clarification"
    STOPPED = "stopped"
    FINISHED = "finished"


class SessionError(RuntimeError):
    """Operation not valid in the session's current phase."""


@dataclass(frozen=True)
class Event:
    """One log entry; progress is task progress in [0, 1] at the time of the event."""

    seq: int
    wall_time: float
    progress: float
    kind: str  # utterance | modification | assurance | question | ignored | stop
    mode: str
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "wall_time": self.wall_time,
            "progress": self.progress,
            "kind": self.kind,
            "mode": self.mode,
            "payload": self.payload,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class Outcome:
    """Result handed back for one submitted utterance or answer."""

    feedback: Optional[str]
    modified: bool
    phase: Phase


def resume_point(old_time: float, old_traj: Trajectory, new_traj: Trajectory) -> float:
    """Map a playback time onto a retimed version of the same waypoint sequence.

    The session resumes at the waypoint index it had most recently passed,
    preserving the fractional position within the segment, so a speed change
    never skips or repeats part of the path.
    """
    if len(old_traj) != len(new_traj):
        raise ValueError(
            f"trajectories must share waypoint count ({len(old_traj)} != {len(new_traj)})"
        )
    old_times = old_traj.times()
    new_times = new_traj.times()
    if old_time <= old_times[0]:
        return new_times[0]
    if old_time >= old_times[-1]:
        return new_times[-1]
    i = bisect_right(old_times, old_time) - 1
    frac = (old_time - old_times[i]) / (old_times[i + 1] - old_times[i])
    return new_times[i] + frac * (new_times[i + 1] - new_times[i])


class Session:
    """Single-trajectory playback session; see the module docstring for modes."""

    def __init__(
        self,
        traj: Trajectory,
        lms: LandmarkSet,
        mode: Mode,
        backend: Optional[InterpreterBackend],
        params: ApplyParams = DEFAULT_PARAMS,
        *,
        threshold: float = DEFAULT_PROXIMITY_THRESHOLD,
        pause_s: float = DEFAULT_PAUSE_S,
        clock: Callable[[], float] = time.time,
        synthetic_latency: Optional[tuple[float, float]] = None,
        templates: Optional[PromptTemplates] = None,
    ):
        violations = validate(traj)
        if violations:
            raise ValueError("invalid trajectory: " + "; ".join(violations))
        mode = Mode(mode)
        if backend is None and mode is not Mode.NO_MODIFICATION:
            raise ValueError(f"mode {mode.value} requires an interpreter backend")
        self.original = traj
        self.current = traj
        self.lms = lms
        self.mode = mode
        self.backend = backend
        self.params = params
        self.threshold = threshold
        self.pause_s = pause_s
        self.clock = clock
        self.synthetic_latency = synthetic_latency
        self.templates = templates
        self.phase = Phase.RUNNING
        self.progress_time = traj.start_time
        self.history = History()
        self.pending: Optional[PendingClarification] = None
        self.events: list[Event] = []
        self._hold_s = 0.0
        self._clarification_streak = 0
        self._last_progress = 0.0

    # -- state ------------------------------------------------------------

    @property
    def progress(self) -> float:
        """Task progress in [0, 1]: elapsed time over the current total duration."""
        duration = self.current.duration
        if duration <= 0:
            return 1.0
        return (self.progress_time - self.current.start_time) / duration

    def executor_state(self) -> dict:
        pos, vel, force = interpolate_state(self.current, self.progress_time)
        return {"pos": pos.as_list(), "vel": vel, "force": force}

    def state(self) -> dict:
        return {
            "phase": self.phase.value,
            "mode": self.mode.value,
            "progress_time": self.progress_time,
            "progress": self.progress,
            "executor": self.executor_state(),
            "trajectory_hash": trajectory_hash(self.current),
            "original_hash": trajectory_hash(self.original),
            "pending_question": self.pending.question if self.pending else None,
            "event_count": len(self.events),
        }

    def _log(self, kind: str, payload: dict) -> Event:
        # Progress is clamped monotone: an index-anchored resume onto a locally
        # retimed trajectory can nudge the time-based fraction backward.
        progress = max(min(self.progress, 1.0), self._last_progress)
        self._last_progress = progress
        event = Event(
            seq=len(self.events),
            wall_time=self.clock(),
            progress=progress,
            kind=kind,
            mode=self.mode.value,
            payload=payload,
        )
        self.events.append(event)
        return event

    # -- playback ---------------------------------------------------------

    def tick(self, dt: float) -> Phase:
        """Advance playback by ``dt`` seconds of simulated/real time."""
        if dt <= 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        if self.phase is Phase.PAUSED and self._hold_s > 0.0:
            if dt < self._hold_s:
                self._hold_s -= dt
                return self.phase
            dt -= self._hold_s
            self._hold_s = 0.0
            self.phase = Phase.RUNNING
            if dt == 0.0:
                return self.phase
        if self.phase is not Phase.RUNNING:
            return self.phase
        end = self.current.end_time
        self.progress_time = min(self.progress_time + dt, end)
        if self.progress_time >= end:
            self.phase = Phase.FINISHED
        return self.phase

    def stop(self) -> Phase:
        """Terminal stop, from a stop-flagged spec or called directly."""
        if self.phase is Phase.FINISHED:
            raise SessionError("session already finished")
        self.phase = Phase.STOPPED
        self._hold_s = 0.0
        self.pending = None
        self._log("stop", {})
        return self.phase

    # -- conversation -----------------------------------------------------

    def submit_utterance(self, text: str) -> Outcome:
        """Pause, interpret by mode, apply/ask/ignore, and resume."""
        if not text or not text.strip():
            raise ValueError("utterance must be nonempty")
        if self.phase is Phase.AWAITING_CLARIFICATION:
            return self.answer_clarification(text)
        if self.phase not in (Phase.RUNNING, Phase.PAUSED):
            raise SessionError(f"cannot accept an utterance in phase {self.phase.value}")
        self._log("utterance", {"text": text})
        if self.mode is Mode.NO_MODIFICATION:
            self.phase = Phase.PAUSED
            self._hold_s = self.pause_s
            self._log("ignored", {"reason": "no_modification"})
            return Outcome(feedback=None, modified=False, phase=self.phase)

        self.phase = Phase.PAUSED
        started = time.perf_counter()
        try:
            reply = interpret(
                text,
                self.current,
                self.lms,
                self.history,
                self.backend,
                self.threshold,
                self.templates,
            )
        except (BackendError, ReplyFormatError) as exc:
            logger.warning("interpreter unavailable: %s", exc)
            self._log(
                "ignored",
                {"reason": "interpreter_error", "error": str(exc), "raw": getattr(exc, "raw", "")},
            )
            self.phase = Phase.RUNNING
            return Outcome(feedback=None, modified=False, phase=self.phase)
        return self._handle_reply(text, reply, time.perf_counter() - started)

    def answer_clarification(self, text: str) -> Outcome:
        """Interpret the user's answer to the pending clarifying question."""
        if self.phase is not Phase.AWAITING_CLARIFICATION or self.pending is None:
            raise SessionError(f"no clarification pending in phase {self.phase.value}")
        if not text or not text.strip():
            raise ValueError("clarification answer must be nonempty")
        self._log("utterance", {"text": text, "answers": self.pending.question})
        started = time.perf_counter()
        try:
            reply = interpret_clarification(
                self.pending.question,
                text,
                self.current,
                self.lms,
                self.backend,
                self.threshold,
                self.templates,
            )
        except (BackendError, ReplyFormatError) as exc:
            logger.warning("interpreter unavailable during clarification: %s", exc)
            self._log(
                "ignored",
                {"reason": "interpreter_error", "error": str(exc), "raw": getattr(exc, "raw", "")},
            )
            return Outcome(feedback=None, modified=False, phase=self.phase)
        return self._handle_reply(text, reply, time.perf_counter() - started, answering=True)

    def _handle_reply(
        self, text: str, reply: InterpreterReply, interpret_s: float, answering: bool = False
    ) -> Outcome:
        bidirectional = self.mode is Mode.BIDIRECTIONAL

        if reply.needs_clarification:
            self._clarification_streak += 1
            if self._clarification_streak >= 3:
                logger.warning(
                    "%d consecutive clarifications without a resolved change",
                    self._clarification_streak,
                )
            if bidirectional:
                origin = self.pending.utterance if answering and self.pending else text
                self.pending = PendingClarification(question=reply.feedback, utterance=origin)
                self.phase = Phase.AWAITING_CLARIFICATION
                self._log("question", {"text": reply.feedback, "interpret_s": interpret_s})
                return Outcome(feedback=reply.feedback, modified=False, phase=self.phase)
            self._log("ignored", {"reason": "unclear"})
            self.phase = Phase.RUNNING
            return Outcome(feedback=None, modified=False, phase=self.phase)

        self._clarification_streak = 0
        self.pending = None

        if reply.spec.global_.stop:
            feedback = reply.feedback if bidirectional else None
            self.phase = Phase.STOPPED
            self._hold_s = 0.0
            self._log("stop", {"spec_yaml": serialize_spec(reply.spec)})
            if feedback:
                self._log("assurance", {"text": feedback})
            return Outcome(feedback=feedback, modified=False, phase=self.phase)

        if reply.spec.has_modifications:
            started = time.perf_counter()
            new_traj = apply(self.current, reply.spec, self.lms, self.params)
            apply_s = time.perf_counter() - started
            self.progress_time = resume_point(self.progress_time, self.current, new_traj)
            self.current = new_traj
            if self.synthetic_latency is not None:
                interpret_s, apply_s = self.synthetic_latency
            spec_yaml = serialize_spec(reply.spec)
            feedback = reply.feedback if bidirectional else None
            self._log(
                "modification",
                {
                    "spec_yaml": spec_yaml,
                    "interpret_s": interpret_s,
                    "apply_s": apply_s,
                    "trajectory_hash": trajectory_hash(new_traj),
                },
            )
            if feedback:
                self._log("assurance", {"text": feedback})
            self.history.record(ConversationTurn(utterance=text, reply_yaml=spec_yaml, feedback=feedback))
            self.phase = Phase.RUNNING
            return Outcome(feedback=feedback, modified=True, phase=self.phase)

        self._log("ignored", {"reason": "no_change"})
        self.phase = Phase.RUNNING
        return Outcome(feedback=None, modified=False, phase=self.phase)

    # -- analytics --------------------------------------------------------

    def modification_fractions(self) -> list[float]:
        return [e.progress for e in self.events if e.kind == "modification"]

    def ccdf(self) -> StepCurve:
        return ccdf_remaining(self.modification_fractions())

    def latency(self) -> Optional[LatencyStats]:
        return latency_stats(self.events)


def start(
    traj: Trajectory,
    lms: LandmarkSet,
    mode: Mode | str,
    backend: Optional[InterpreterBackend],
    params: ApplyParams = DEFAULT_PARAMS,
    **kwargs,
) -> Session:
    """Create a running session at the trajectory's first timestamp."""
    return Session(traj, lms, Mode(mode), backend, params, **kwargs)
