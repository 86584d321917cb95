"""Trajectory and landmark domain model.

A trajectory is an ordered sequence of timed waypoints, each carrying a 3D
position plus speed and force magnitudes.  Between waypoints the executor
follows a straight-line path with speed and force interpolated linearly in
time.  Landmarks are named 3D points on the user's body; waypoints are
labeled with their nearest landmark for the symbolic context handed to the
utterance interpreter.

All types are immutable values; every operation returns a new object, so
instances are safe to share across threads.
"""

from __future__ import annotations

import hashlib
import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional

from .geometry import Vec3

# Body joints the interpreter prompt knows about. LandmarkSet accepts any
# nonempty names, so task-specific sets can extend this vocabulary.
CANONICAL_LANDMARKS = (
    "left wrist",
    "right wrist",
    "left elbow",
    "right elbow",
    "left shoulder",
    "right shoulder",
    "mouth",
)

# Waypoints farther than this from every landmark get no label.
DEFAULT_PROXIMITY_THRESHOLD = 0.10  # m


@dataclass(frozen=True)
class Waypoint:
    """Timed sample of the planned motion: position, speed and force magnitude."""

    t: float  # s
    pos: Vec3  # m
    vel: float  # m/s, magnitude
    force: float  # N, magnitude


@dataclass(frozen=True)
class Trajectory:
    """Ordered waypoint sequence; see :func:`validate` for the invariants."""

    waypoints: tuple[Waypoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "waypoints", tuple(self.waypoints))

    def __len__(self) -> int:
        return len(self.waypoints)

    def __iter__(self) -> Iterator[Waypoint]:
        return iter(self.waypoints)

    @property
    def start_time(self) -> float:
        return self.waypoints[0].t

    @property
    def end_time(self) -> float:
        return self.waypoints[-1].t

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time

    def times(self) -> list[float]:
        return [wp.t for wp in self.waypoints]

    def to_records(self) -> list[dict]:
        """Plain-data form used by the file formats and the HTTP API."""
        return [
            {"t": wp.t, "pos": wp.pos.as_list(), "vel": wp.vel, "force": wp.force}
            for wp in self.waypoints
        ]

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "Trajectory":
        """Build from `{t, pos: [x,y,z], vel, force}` records; shape errors name the record."""
        waypoints = []
        for i, rec in enumerate(records):
            try:
                pos = rec["pos"]
                if len(pos) != 3:
                    raise ValueError(f"pos must have 3 components, got {len(pos)}")
                wp = Waypoint(
                    t=float(rec["t"]),
                    pos=Vec3.of(pos),
                    vel=float(rec["vel"]),
                    force=float(rec["force"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"waypoint record {i}: {exc}") from exc
            waypoints.append(wp)
        return cls(tuple(waypoints))


@dataclass(frozen=True)
class Landmark:
    """Named 3D body point (wrist, elbow, shoulder, mouth, ...)."""

    name: str
    pos: Vec3


class LandmarkSet:
    """Collection of landmarks with unique names; preserves insertion order."""

    def __init__(self, landmarks: Iterable[Landmark] = ()):
        self._by_name: dict[str, Landmark] = {}
        for lm in landmarks:
            if not lm.name:
                raise ValueError("landmark name must be nonempty")
            if lm.name in self._by_name:
                raise ValueError(f"duplicate landmark name {lm.name!r}")
            self._by_name[lm.name] = lm

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Iterable[float]]) -> "LandmarkSet":
        return cls(Landmark(name, Vec3.of(coords)) for name, coords in mapping.items())

    def to_dict(self) -> dict[str, list[float]]:
        return {name: lm.pos.as_list() for name, lm in self._by_name.items()}

    def names(self) -> list[str]:
        return list(self._by_name)

    def get(self, name: str) -> Landmark:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown landmark {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)

    def __iter__(self) -> Iterator[Landmark]:
        return iter(self._by_name.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LandmarkSet):
            return NotImplemented
        return self._by_name == other._by_name


def validate(traj: Trajectory) -> list[str]:
    """Return every violated trajectory invariant, empty list when well formed."""
    violations = []
    if len(traj.waypoints) < 2:
        violations.append("trajectory must contain at least 2 waypoints")
    for i, wp in enumerate(traj.waypoints):
        if not wp.pos.is_finite():
            violations.append(f"waypoint {i}: position must be finite")
        for field in ("t", "vel", "force"):
            value = getattr(wp, field)
            if not math.isfinite(value):
                violations.append(f"waypoint {i}: {field} must be finite")
            elif value < 0:
                violations.append(f"waypoint {i}: {field} >= 0 violated (got {value})")
    for i in range(len(traj.waypoints) - 1):
        if not traj.waypoints[i].t < traj.waypoints[i + 1].t:
            violations.append(
                f"timestamps strictly increasing violated between waypoints {i} and {i + 1}"
            )
    return violations


def interpolate_state(traj: Trajectory, t: float) -> tuple[Vec3, float, float]:
    """State (pos, vel, force) at time ``t``, linear in time along each segment.

    Raises ValueError when ``t`` lies outside the trajectory's time interval.
    Queries at a waypoint timestamp reproduce that waypoint's state exactly.
    """
    times = traj.times()
    if t < times[0] or t > times[-1]:
        raise ValueError(f"t={t} outside trajectory interval [{times[0]}, {times[-1]}]")
    i = bisect_right(times, t) - 1
    if i >= len(times) - 1:
        wp = traj.waypoints[-1]
        return wp.pos, wp.vel, wp.force
    a, b = traj.waypoints[i], traj.waypoints[i + 1]
    if t == a.t:
        return a.pos, a.vel, a.force
    s = (t - a.t) / (b.t - a.t)
    pos = a.pos + (b.pos - a.pos).scaled(s)
    vel = a.vel + (b.vel - a.vel) * s
    force = a.force + (b.force - a.force) * s
    return pos, vel, force


def nearest_landmark(
    wp: Waypoint, lms: LandmarkSet, threshold: float = DEFAULT_PROXIMITY_THRESHOLD
) -> Optional[str]:
    """Name of the closest landmark within ``threshold`` meters, else None.

    Distance ties break lexicographically by name so labeling is deterministic.
    """
    if threshold <= 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    best: tuple[float, str] | None = None
    for lm in lms:
        key = (wp.pos.distance_to(lm.pos), lm.name)
        if best is None or key < best:
            best = key
    if best is None or best[0] > threshold:
        return None
    return best[1]


def to_context_yaml(
    traj: Trajectory, lms: LandmarkSet, threshold: float = DEFAULT_PROXIMITY_THRESHOLD
) -> str:
    """Symbolic YAML sketch of the trajectory: one `waypoint i` entry per waypoint.

    Keys are 1-based; the only field is `nearest landmark`, the label from
    :func:`nearest_landmark` or `none`.
    """
    lines = []
    for i, wp in enumerate(traj.waypoints, start=1):
        label = nearest_landmark(wp, lms, threshold) or "none"
        lines.append(f"waypoint {i}:")
        lines.append(f"    nearest landmark: {label}")
    return "\n".join(lines)


def retime(traj: Trajectory) -> Trajectory:
    """Recompute timestamps from positions and speeds, keeping the start time.

    Each segment's duration is its Euclidean length divided by the mean of the
    endpoint speeds (exact for linear-in-time speed).  Zero-length segments are
    dwells and keep their current duration.  A zero mean speed over a segment
    of nonzero length has no finite duration and raises ValueError.
    """
    wps = traj.waypoints
    new_times = [wps[0].t]
    for i in range(len(wps) - 1):
        a, b = wps[i], wps[i + 1]
        length = a.pos.distance_to(b.pos)
        if length == 0.0:
            duration = b.t - a.t
        else:
            mean_speed = (a.vel + b.vel) / 2.0
            if mean_speed <= 0.0:
                raise ValueError(
                    f"segment {i}->{i + 1} has zero mean speed over nonzero length {length}"
                )
            duration = length / mean_speed
        new_times.append(new_times[-1] + duration)
    return Trajectory(
        tuple(
            Waypoint(t=new_times[i], pos=wp.pos, vel=wp.vel, force=wp.force)
            for i, wp in enumerate(wps)
        )
    )


def trajectory_hash(traj: Trajectory) -> str:
    """Stable hash of the exact float values; equal iff trajectories are bitwise equal."""
    digest = hashlib.sha256()
    for wp in traj.waypoints:
        digest.update(
            f"{wp.t!r}|{wp.pos.x!r}|{wp.pos.y!r}|{wp.pos.z!r}|{wp.vel!r}|{wp.force!r}\n".encode()
        )
    return digest.hexdigest()
