"""Scripted scenario replay: run a whole session deterministically and report.

A scenario file (YAML, see ``docs/file-formats.md``) names the trajectory,
landmarks, communication mode, backend (mock or scripted), optional parameter
overrides, and a list of timed inputs.  Replays run on a simulated clock, so
two runs of the same scenario with the mock or scripted backend produce
byte-identical event logs; latency fields in the log come from the scenario's
synthetic latency model (zero by default) rather than wall time, which is
only meaningful in live sessions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .analytics import LatencyStats
from .files import FileFormatError, _load_document, load_landmarks, load_replies, load_trajectory, params_from_mapping
from .interpreter import InterpreterBackend, MockBackend, ScriptedBackend
from .session import DEFAULT_PAUSE_S, Mode, Phase, Session
from .trajectory import DEFAULT_PROXIMITY_THRESHOLD, trajectory_hash

logger = logging.getLogger(__name__)

DEFAULT_TICK_DT = 0.05  # s of simulated time per step
MAX_SIM_TIME = 3600.0  # guard against scenarios that can never finish

_SCENARIO_KEYS = {
    "mode",
    "trajectory",
    "landmarks",
    "inputs",
    "backend",
    "replies",
    "params",
    "tick_dt",
    "pause_s",
    "threshold",
    "latency",
}


@dataclass(frozen=True)
class TimedInput:
    say: str
    at: Optional[float] = None  # simulated seconds
    at_progress: Optional[float] = None  # task progress fraction


@dataclass(frozen=True)
class Scenario:
    mode: Mode
    trajectory_path: Path
    landmarks_path: Path
    inputs: tuple[TimedInput, ...]
    backend: str = "mock"  # mock | scripted
    replies_path: Optional[Path] = None
    params_overrides: dict = None
    tick_dt: float = DEFAULT_TICK_DT
    pause_s: float = DEFAULT_PAUSE_S
    threshold: float = DEFAULT_PROXIMITY_THRESHOLD
    latency: tuple[float, float] = (0.0, 0.0)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    doc = _load_document(path)
    if not isinstance(doc, dict):
        raise FileFormatError(f"{path}: scenario file must contain a mapping")
    unknown = set(doc) - _SCENARIO_KEYS
    if unknown:
        raise FileFormatError(f"{path}: unknown scenario key(s): {sorted(unknown)}")
    for key in ("mode", "trajectory", "landmarks", "inputs"):
        if key not in doc:
            raise FileFormatError(f"{path}: scenario requires a {key!r} entry")
    try:
        mode = Mode(doc["mode"])
    except ValueError:
        raise FileFormatError(
            f"{path}: mode must be one of {[m.value for m in Mode]}, got {doc['mode']!r}"
        ) from None
    base = path.parent
    inputs = []
    for i, item in enumerate(doc["inputs"]):
        if not isinstance(item, dict) or "say" not in item:
            raise FileFormatError(f"{path}: input {i} must be a mapping with a 'say' entry")
        unknown = set(item) - {"say", "at", "at_progress"}
        if unknown:
            raise FileFormatError(f"{path}: input {i} has unknown key(s): {sorted(unknown)}")
        at = item.get("at")
        at_progress = item.get("at_progress")
        if (at is None) == (at_progress is None):
            raise FileFormatError(f"{path}: input {i} needs exactly one of 'at' or 'at_progress'")
        inputs.append(
            TimedInput(
                say=str(item["say"]),
                at=None if at is None else float(at),
                at_progress=None if at_progress is None else float(at_progress),
            )
        )
    backend = doc.get("backend", "mock")
    if backend not in ("mock", "scripted"):
        raise FileFormatError(f"{path}: backend must be 'mock' or 'scripted', got {backend!r}")
    replies_path = doc.get("replies")
    if backend == "scripted" and replies_path is None:
        raise FileFormatError(f"{path}: scripted backend requires a 'replies' file")
    latency = doc.get("latency") or {}
    if not isinstance(latency, dict) or set(latency) - {"interpret_s", "apply_s"}:
        raise FileFormatError(f"{path}: latency must map interpret_s/apply_s to seconds")
    return Scenario(
        mode=mode,
        trajectory_path=base / str(doc["trajectory"]),
        landmarks_path=base / str(doc["landmarks"]),
        inputs=tuple(inputs),
        backend=backend,
        replies_path=None if replies_path is None else base / str(replies_path),
        params_overrides=doc.get("params") or {},
        tick_dt=float(doc.get("tick_dt", DEFAULT_TICK_DT)),
        pause_s=float(doc.get("pause_s", DEFAULT_PAUSE_S)),
        threshold=float(doc.get("threshold", DEFAULT_PROXIMITY_THRESHOLD)),
        latency=(float(latency.get("interpret_s", 0.0)), float(latency.get("apply_s", 0.0))),
    )


def _make_backend(scenario: Scenario) -> InterpreterBackend:
    if scenario.backend == "scripted":
        return ScriptedBackend(load_replies(scenario.replies_path))
    return MockBackend()


@dataclass(frozen=True)
class ReplayResult:
    session: Session
    sim_time: float

    @property
    def events(self):
        return self.session.events

    def report(self) -> dict:
        stats = self.session.latency()
        curve = self.session.ccdf()
        return {
            "mode": self.session.mode.value,
            "final_phase": self.session.phase.value,
            "sim_time_s": self.sim_time,
            "event_counts": self._event_counts(),
            "ccdf_points": [list(p) for p in curve.points],
            "latency": None
            if stats is None
            else {
                "count": stats.count,
                "mean_interpret_s": stats.mean_interpret_s,
                "mean_apply_s": stats.mean_apply_s,
                "mean_total_s": stats.mean_total_s,
            },
            "final_trajectory_hash": trajectory_hash(self.session.current),
            "original_trajectory_hash": trajectory_hash(self.session.original),
            "final_trajectory": self.session.current.to_records(),
        }

    def _event_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for event in self.session.events:
            counts[event.kind] = counts.get(event.kind, 0) + 1
        return dict(sorted(counts.items()))


def run_scenario(scenario: Scenario, backend: Optional[InterpreterBackend] = None) -> ReplayResult:
    """Run a scenario to completion on a simulated clock.

    Inputs fire when their simulated time or progress trigger is reached;
    while a clarification is pending, playback is frozen, so the next input
    fires immediately as the answer.  Inputs left over after the session
    stops or finishes are dropped with a warning.
    """
    traj = load_trajectory(scenario.trajectory_path)
    lms = load_landmarks(scenario.landmarks_path)
    params = params_from_mapping(scenario.params_overrides)
    backend = backend or _make_backend(scenario)

    sim_time = 0.0
    session = Session(
        traj,
        lms,
        scenario.mode,
        backend,
        params,
        threshold=scenario.threshold,
        pause_s=scenario.pause_s,
        clock=lambda: sim_time,
        synthetic_latency=scenario.latency,
    )

    def triggered(item: TimedInput) -> bool:
        if item.at is not None:
            return sim_time >= item.at
        return session.progress >= item.at_progress

    for item in scenario.inputs:
        while (
            session.phase in (Phase.RUNNING, Phase.PAUSED)
            and not triggered(item)
            and sim_time < MAX_SIM_TIME
        ):
            session.tick(scenario.tick_dt)
            sim_time += scenario.tick_dt
        if session.phase in (Phase.STOPPED, Phase.FINISHED):
            logger.warning("dropping input %r: session %s", item.say, session.phase.value)
            continue
        session.submit_utterance(item.say)

    while session.phase in (Phase.RUNNING, Phase.PAUSED) and sim_time < MAX_SIM_TIME:
        session.tick(scenario.tick_dt)
        sim_time += scenario.tick_dt

    return ReplayResult(session=session, sim_time=sim_time)
