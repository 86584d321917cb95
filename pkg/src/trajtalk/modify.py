"""Deterministic application of a ModificationSpec to a trajectory.

Velocity/force multipliers act multiplicatively: globally, per waypoint, or
anchored to a landmark with Gaussian decay over distance

    factor(d) = 1 + (k - 1) * exp(-d^2 / (2 * sigma^2))

so the change fades smoothly away from the landmark.  Position changes come
from artificial potential fields evaluated once per waypoint: quadratic
attractive wells (distance-weighted when several attractors are present) and
range-limited repulsive barriers.  The net displacement is a single step
along the negative field gradient, capped in norm because the raw repulsive
gradient diverges near the landmark.

After any change, velocities are clamped to [v_min, v_max], forces to
[0, f_max], and timestamps are recomputed so segment durations stay
consistent with the edited speeds (see :func:`trajtalk.trajectory.retime`).

Everything here is pure value-in/value-out; callers may parallelize across
independent trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Mapping, Optional, Sequence

from .geometry import Vec3, ZERO
from .schema import ModificationSpec, WaypointChange
from .trajectory import Landmark, LandmarkSet, Trajectory, Waypoint, retime


@dataclass(frozen=True)
class ApplyParams:
    """Tuning constants for scaling, displacement, and safety clamps."""

    sigma: float = 0.07  # m, Gaussian spread of landmark-scoped scaling
    k_p: float = 0.01  # m^-2, attractive potential gain
    eta: float = 0.5  # m^2, repulsive potential gain
    rho0: float = 0.1  # m, repulsive range of effect
    v_max: float = 0.1  # m/s, safety cap
    v_min: float = 0.005  # m/s, floor so repeated "slower" cannot stall playback
    f_max: float = 15.0  # N, safety cap
    delta_max: float = 0.05  # m, per-waypoint displacement cap per utterance
    eps_d: float = 1e-6  # m, distance floor for inverse-distance terms

    def __post_init__(self) -> None:
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"{f.name} must be positive, got {getattr(self, f.name)}")
        if not self.v_min < self.v_max:
            raise ValueError(f"v_min ({self.v_min}) must be < v_max ({self.v_max})")

    @classmethod
    def from_mapping(cls, overrides: Mapping, base: Optional["ApplyParams"] = None) -> "ApplyParams":
        """Params with ``overrides`` applied on top of ``base`` (or the defaults)."""
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown apply parameter(s): {sorted(unknown)}")
        return replace(base or cls(), **{k: float(v) for k, v in overrides.items()})


DEFAULT_PARAMS = ApplyParams()


def gaussian_factor(k: float, d: float, sigma: float) -> float:
    """Scaling factor at distance ``d`` from a landmark with multiplier ``k``.

    Equals ``k`` at the landmark and decays monotonically toward 1; the same
    expression handles decreases (k < 1).
    """
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if d == 0.0:
        return k  # exact endpoint; 1 + (k-1) can be an ulp off for k like 1/3
    return 1.0 + (k - 1.0) * math.exp(-(d * d) / (2.0 * sigma * sigma))


def _clamp_vel(v: float, params: ApplyParams) -> float:
    return min(max(v, params.v_min), params.v_max)


def _clamp_force(f: float, params: ApplyParams) -> float:
    return min(max(f, 0.0), params.f_max)


def _rescaled(
    traj: Trajectory, vel_factors: Sequence[float], force_factors: Sequence[float], params: ApplyParams
) -> Trajectory:
    """Apply per-waypoint factors; factor 1.0 leaves the value bitwise untouched."""
    new = []
    for wp, fv, ff in zip(traj.waypoints, vel_factors, force_factors):
        vel = wp.vel if fv == 1.0 else _clamp_vel(wp.vel * fv, params)
        force = wp.force if ff == 1.0 else _clamp_force(wp.force * ff, params)
        new.append(Waypoint(t=wp.t, pos=wp.pos, vel=vel, force=force))
    return Trajectory(tuple(new))


def _check_multiplier(value: Optional[float], what: str) -> None:
    if value is not None and value <= 0:
        raise ValueError(f"{what} multiplier must be > 0, got {value}")


def scale_global(
    traj: Trajectory,
    v_mult: Optional[float] = None,
    f_mult: Optional[float] = None,
    params: ApplyParams = DEFAULT_PARAMS,
) -> Trajectory:
    """Scale every waypoint's velocity/force uniformly, then clamp and retime."""
    _check_multiplier(v_mult, "velocity")
    _check_multiplier(f_mult, "force")
    n = len(traj)
    fv = [v_mult if v_mult is not None else 1.0] * n
    ff = [f_mult if f_mult is not None else 1.0] * n
    return retime(_rescaled(traj, fv, ff, params))


def _landmark_factors(
    traj: Trajectory, lm: Landmark, mult: Optional[float], params: ApplyParams
) -> list[float]:
    if mult is None:
        return [1.0] * len(traj)
    return [
        gaussian_factor(mult, wp.pos.distance_to(lm.pos), params.sigma) for wp in traj.waypoints
    ]


def scale_landmark(
    traj: Trajectory,
    lm: Landmark,
    v_mult: Optional[float] = None,
    f_mult: Optional[float] = None,
    params: ApplyParams = DEFAULT_PARAMS,
) -> Trajectory:
    """Scale velocity/force with Gaussian decay by distance to ``lm``."""
    _check_multiplier(v_mult, "velocity")
    _check_multiplier(f_mult, "force")
    fv = _landmark_factors(traj, lm, v_mult, params)
    ff = _landmark_factors(traj, lm, f_mult, params)
    return retime(_rescaled(traj, fv, ff, params))


def _waypoint_factors(
    traj: Trajectory, changes: Mapping[int, WaypointChange]
) -> tuple[list[float], list[float]]:
    n = len(traj)
    fv = [1.0] * n
    ff = [1.0] * n
    for index in sorted(changes):
        change = changes[index]
        if not 1 <= index <= n:
            raise ValueError(f"waypoint index {index} out of range 1..{n}")
        _check_multiplier(change.velocity, f"waypoint {index} velocity")
        _check_multiplier(change.force, f"waypoint {index} force")
        if change.velocity is not None:
            fv[index - 1] *= change.velocity
        if change.force is not None:
            ff[index - 1] *= change.force
    return fv, ff


def scale_waypoints(
    traj: Trajectory,
    changes: Mapping[int, WaypointChange],
    params: ApplyParams = DEFAULT_PARAMS,
) -> Trajectory:
    """Scale only the listed waypoints (1-based indices); neighbors stay untouched."""
    fv, ff = _waypoint_factors(traj, changes)
    return retime(_rescaled(traj, fv, ff, params))


def attract_displacement(
    x: Vec3, attractors: Sequence[tuple[Vec3, float]], params: ApplyParams = DEFAULT_PARAMS
) -> Vec3:
    """Single-step displacement of ``x`` toward quadratic attractors (k > 1 each).

    Each attractor's pull is ``k * k_p * (p - x)``; with several attractors the
    pulls are blended with inverse-distance weights so a waypoint already close
    to one attractor is not dragged toward the others.
    """
    if not attractors:
        return ZERO
    weights = []
    for p, k in attractors:
        if k <= 1.0:
            raise ValueError(f"attractor multiplier must be > 1, got {k}")
        weights.append(1.0 / max(x.distance_to(p), params.eps_d))
    total_weight = sum(weights)
    delta = ZERO
    for (p, k), w in zip(attractors, weights):
        delta = delta + (p - x).scaled((w / total_weight) * k * params.k_p)
    return delta


def repulse_displacement(
    x: Vec3, repulsors: Sequence[tuple[Vec3, float]], params: ApplyParams = DEFAULT_PARAMS
) -> Vec3:
    """Single-step displacement of ``x`` away from range-limited repulsors (0 < k < 1).

    A repulsor has no effect beyond ``rho0``.  Inside the range the push is
    directed along ``x - p`` with magnitude ``(eta/k) * (1/d - 1/rho0) / d^2``,
    with the distance floored at ``eps_d``; the raw magnitude diverges near the
    landmark and is capped downstream by :func:`displace_positions`.
    """
    total = ZERO
    for p, k in repulsors:
        if not 0.0 < k < 1.0:
            raise ValueError(f"repulsor multiplier must be in (0, 1), got {k}")
        d = x.distance_to(p)
        if d > params.rho0:
            continue
        dd = max(d, params.eps_d)
        magnitude = (params.eta / k) * (1.0 / dd - 1.0 / params.rho0) * (1.0 / (dd * dd))
        # Direction (x - p) / d; a waypoint exactly on the repulsor has no
        # defined direction and contributes nothing.
        total = total + (x - p).scaled(magnitude / dd)
    return total


def _displaced_waypoints(
    traj: Trajectory,
    landmark_attracts: Mapping[str, float],
    lms: LandmarkSet,
    params: ApplyParams,
) -> Trajectory:
    attractors = []
    repulsors = []
    for name in sorted(landmark_attracts):
        k = landmark_attracts[name]
        if k <= 0:
            raise ValueError(f"attract multiplier for {name!r} must be > 0, got {k}")
        if k == 1.0:
            continue
        pos = lms.get(name).pos
        (attractors if k > 1.0 else repulsors).append((pos, k))
    if not attractors and not repulsors:
        return traj
    new = []
    for wp in traj.waypoints:
        delta = attract_displacement(wp.pos, attractors, params) + repulse_displacement(
            wp.pos, repulsors, params
        )
        norm = delta.norm()
        if norm > params.delta_max:
            delta = delta.scaled(params.delta_max / norm)
        new.append(Waypoint(t=wp.t, pos=wp.pos + delta, vel=wp.vel, force=wp.force))
    return Trajectory(tuple(new))


def displace_positions(
    traj: Trajectory,
    landmark_attracts: Mapping[str, float],
    lms: LandmarkSet,
    params: ApplyParams = DEFAULT_PARAMS,
) -> Trajectory:
    """Displace each waypoint once along the net potential-field step.

    Multipliers > 1 attract, < 1 repel; the step norm is capped at
    ``delta_max`` per waypoint.  Unknown landmark names raise ValueError.
    """
    moved = _displaced_waypoints(traj, landmark_attracts, lms, params)
    if moved is traj:
        return traj
    return retime(moved)


def apply(
    traj: Trajectory,
    spec: ModificationSpec,
    lms: LandmarkSet,
    params: ApplyParams = DEFAULT_PARAMS,
) -> Trajectory:
    """Apply one utterance's spec: all scopes concurrently, one retime at the end.

    Within the utterance, positional displacement happens first so the
    distance-dependent scaling sees the post-move geometry; velocity/force
    factors from the landmark, waypoint, and global scopes then compose
    multiplicatively and are clamped once.  A spec that asks for clarification,
    or carries no changes (including stop-only specs), returns the trajectory
    unchanged, bitwise.
    """
    if spec.global_.clarification or not spec.has_modifications:
        return traj

    current = traj
    attracts = {
        name: change.attract
        for name, change in spec.landmarks.items()
        if change.attract is not None
    }
    if attracts:
        current = _displaced_waypoints(current, attracts, lms, params)

    n = len(current)
    fv = [1.0] * n
    ff = [1.0] * n
    for name in sorted(spec.landmarks):
        change = spec.landmarks[name]
        if change.velocity is None and change.force is None:
            continue
        lm = lms.get(name)
        for i, wp in enumerate(current.waypoints):
            d = wp.pos.distance_to(lm.pos)
            if change.velocity is not None:
                fv[i] *= gaussian_factor(change.velocity, d, params.sigma)
            if change.force is not None:
                ff[i] *= gaussian_factor(change.force, d, params.sigma)
    wp_fv, wp_ff = _waypoint_factors(current, spec.waypoints)
    g = spec.global_
    for i in range(n):
        fv[i] *= wp_fv[i] * (g.velocity if g.velocity is not None else 1.0)
        ff[i] *= wp_ff[i] * (g.force if g.force is not None else 1.0)

    return retime(_rescaled(current, fv, ff, params))
