import random

import pytest

from trajtalk import (
    ApplyParams,
    LandmarkSet,
    Trajectory,
    Vec3,
    Waypoint,
    apply,
    attract_displacement,
    displace_positions,
    gaussian_factor,
    parse_spec,
    repulse_displacement,
    retime,
    scale_global,
    scale_landmark,
    scale_waypoints,
)
from trajtalk.schema import WaypointChange
from trajtalk.trajectory import Landmark

P = ApplyParams()


def straight_traj(vels, forces=None, spacing=0.1):
    forces = forces or [1.0] * len(vels)
    records = [
        {"t": float(i), "pos": [spacing * i, 0.0, 0.0], "vel": v, "force": f}
        for i, (v, f) in enumerate(zip(vels, forces))
    ]
    return retime(Trajectory.from_records(records))


class TestGaussianFactor:
    def test_at_landmark_equals_multiplier(self):
        assert gaussian_factor(2.0, 0.0, 0.07) == 2.0

    def test_one_sigma_oracle(self):
        # 1 + (2-1) * e^{-1/2}, evaluated independently
        assert gaussian_factor(2.0, 0.07, 0.07) == pytest.approx(1.6065306597126334, abs=1e-12)

    def test_far_away_is_identity(self):
        assert gaussian_factor(2.0, 0.7, 0.07) == pytest.approx(1.0, abs=1e-12)

    def test_decrease_shape(self):
        assert gaussian_factor(0.5, 0.0, 0.07) == 0.5
        assert gaussian_factor(0.5, 0.7, 0.07) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("k", [1 / 3, 0.5, 2.0, 3.0])
    def test_bounded_and_monotone_toward_one(self, k):
        lo, hi = min(1.0, k), max(1.0, k)
        previous = None
        for i in range(51):
            d = i * 0.01
            factor = gaussian_factor(k, d, 0.07)
            assert lo - 1e-12 <= factor <= hi + 1e-12
            if previous is not None:
                if k > 1:
                    assert factor < previous
                else:
                    assert factor > previous
            previous = factor

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            gaussian_factor(2.0, -0.1, 0.07)
        with pytest.raises(ValueError):
            gaussian_factor(2.0, 0.1, 0.0)


class TestScaleGlobal:
    def test_doubles_velocities(self):
        traj = straight_traj([0.02, 0.04])
        out = scale_global(traj, v_mult=2.0)
        assert [w.vel for w in out.waypoints] == [0.04, 0.08]

    def test_velocity_capped(self):
        traj = straight_traj([0.06, 0.06])
        out = scale_global(traj, v_mult=2.0)
        assert all(w.vel == P.v_max == 0.1 for w in out.waypoints)

    def test_velocity_floored(self):
        traj = straight_traj([0.01, 0.01])
        out = scale_global(traj, v_mult=1 / 3)
        assert all(w.vel == P.v_min for w in out.waypoints)

    def test_force_halved(self):
        traj = straight_traj([0.02, 0.02], forces=[2.0, 4.0])
        out = scale_global(traj, f_mult=0.5)
        assert [w.force for w in out.waypoints] == [1.0, 2.0]

    def test_force_capped(self):
        traj = straight_traj([0.02, 0.02], forces=[10.0, 10.0])
        out = scale_global(traj, f_mult=2.0)
        assert all(w.force == P.f_max for w in out.waypoints)

    def test_retimed(self):
        traj = straight_traj([0.02, 0.02])
        out = scale_global(traj, v_mult=2.0)
        assert out.duration == pytest.approx(traj.duration / 2)

    def test_scale_then_inverse_restores(self):
        traj = straight_traj([0.02, 0.03, 0.04])
        back = scale_global(scale_global(traj, v_mult=2.0), v_mult=0.5)
        assert [w.vel for w in back.waypoints] == [w.vel for w in traj.waypoints]


class TestScaleLandmark:
    def test_coincident_waypoint_gets_full_multiplier(self):
        traj = straight_traj([0.02, 0.02])
        lm = Landmark("left wrist", traj.waypoints[0].pos)
        out = scale_landmark(traj, lm, v_mult=2.0)
        assert out.waypoints[0].vel == pytest.approx(0.04)

    def test_one_sigma_oracle(self):
        traj = straight_traj([0.02, 0.02], spacing=0.5)
        lm = Landmark("left wrist", Vec3(0.07, 0.0, 0.0) + traj.waypoints[0].pos)
        out = scale_landmark(traj, lm, v_mult=2.0)
        # 0.02 * (1 + e^{-1/2}) evaluated independently
        assert out.waypoints[0].vel == pytest.approx(0.03213061319425267, abs=1e-9)

    def test_distant_waypoint_unchanged(self):
        traj = straight_traj([0.02, 0.02])
        lm = Landmark("mouth", Vec3(0.0, 1.0, 0.0))
        out = scale_landmark(traj, lm, v_mult=2.0)
        assert out.waypoints[0].vel == pytest.approx(0.02, abs=1e-12)


class TestScaleWaypoints:
    def test_only_listed_waypoint_changes(self):
        traj = straight_traj([0.02, 0.02, 0.02, 0.02])
        out = scale_waypoints(traj, {3: WaypointChange(index=3, velocity=2.0)})
        assert [w.vel for w in out.waypoints] == [0.02, 0.02, 0.04, 0.02]

    def test_empty_map_is_identity(self):
        traj = straight_traj([0.02, 0.03])
        assert scale_waypoints(traj, {}) == retime(traj)

    def test_out_of_range_index(self):
        traj = straight_traj([0.02] * 10)
        with pytest.raises(ValueError, match="99"):
            scale_waypoints(traj, {99: WaypointChange(index=99, velocity=2.0)})


class TestAttractDisplacement:
    def test_single_attractor_oracle(self):
        # k * k_p * d = 2 * 0.01 * 0.1 toward the attractor
        delta = attract_displacement(Vec3(0, 0, 0), [(Vec3(0.1, 0, 0), 2.0)], P)
        assert delta.x == pytest.approx(0.002, abs=1e-12)
        assert delta.y == 0.0 and delta.z == 0.0

    def test_symmetric_attractors_cancel(self):
        delta = attract_displacement(
            Vec3(0, 0, 0), [(Vec3(0.1, 0, 0), 2.0), (Vec3(-0.1, 0, 0), 2.0)], P
        )
        assert delta.norm() == pytest.approx(0.0, abs=1e-15)

    def test_coincident_attractor_near_zero(self):
        # The floored inverse-distance weight (1/eps_d) dominates, and its own
        # gradient is ~zero, so the residual pull is on the eps scale.
        delta = attract_displacement(
            Vec3(0, 0, 0), [(Vec3(1e-9, 0, 0), 2.0), (Vec3(0.2, 0, 0), 2.0)], P
        )
        assert delta.norm() < 1e-7

    def test_empty_list_zero(self):
        assert attract_displacement(Vec3(1, 2, 3), [], P) == Vec3(0.0, 0.0, 0.0)

    def test_rejects_non_attracting_multiplier(self):
        with pytest.raises(ValueError):
            attract_displacement(Vec3(0, 0, 0), [(Vec3(1, 0, 0), 0.5)], P)


class TestRepulseDisplacement:
    def test_beyond_range_is_zero(self):
        delta = repulse_displacement(Vec3(0.2, 0, 0), [(Vec3(0, 0, 0), 0.5)], P)
        assert delta == Vec3(0.0, 0.0, 0.0)

    def test_at_range_boundary_is_zero(self):
        delta = repulse_displacement(Vec3(P.rho0, 0, 0), [(Vec3(0, 0, 0), 0.5)], P)
        assert delta.norm() == pytest.approx(0.0, abs=1e-12)

    def test_inside_range_magnitude_oracle(self):
        # (eta/k)(1/d - 1/rho0)(1/d^2) = (0.5/0.5)(12.5 - 10)(156.25) = 390.625
        delta = repulse_displacement(Vec3(0.08, 0, 0), [(Vec3(0, 0, 0), 0.5)], P)
        assert delta.x == pytest.approx(390.625, rel=1e-12)
        assert delta.y == 0.0 and delta.z == 0.0

    def test_direction_along_x_minus_p(self):
        # Angle measured via the cross product (sin of the angle), which stays
        # well conditioned near zero where acos cannot resolve 1e-9 rad.
        rng = random.Random(11)
        checked = 0
        for _ in range(200):
            x = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
            offset = Vec3(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05))
            p = x + offset
            if not 1e-4 < offset.norm() < P.rho0:
                continue
            delta = repulse_displacement(x, [(p, 0.5)], P)
            away = (x - p).scaled(1.0 / (x - p).norm())
            unit = delta.scaled(1.0 / delta.norm())
            cross = Vec3(
                away.y * unit.z - away.z * unit.y,
                away.z * unit.x - away.x * unit.z,
                away.x * unit.y - away.y * unit.x,
            )
            dot = away.x * unit.x + away.y * unit.y + away.z * unit.z
            assert dot > 0
            assert cross.norm() < 1e-9
            checked += 1
        assert checked > 50

    def test_rejects_non_repelling_multiplier(self):
        with pytest.raises(ValueError):
            repulse_displacement(Vec3(0, 0, 0), [(Vec3(1, 0, 0), 2.0)], P)


class TestDisplacePositions:
    def test_no_attract_fields_is_identity(self, simple_traj, body):
        assert displace_positions(simple_traj, {}, body) is simple_traj

    def test_attractor_moves_waypoint_toward_it(self):
        traj = straight_traj([0.02, 0.02], spacing=0.0001)
        lms = LandmarkSet.from_dict({"mouth": [0.1, 0.0, 0.0]})
        out = displace_positions(traj, {"mouth": 2.0}, lms)
        assert out.waypoints[0].pos.x == pytest.approx(0.002, abs=1e-12)

    def test_repulsor_capped_displacement(self):
        traj = straight_traj([0.02, 0.02], spacing=0.3)
        traj = Trajectory(
            (Waypoint(0.0, Vec3(0.08, 0.0, 0.0), 0.02, 1.0),) + traj.waypoints[1:]
        )
        lms = LandmarkSet.from_dict({"mouth": [0.0, 0.0, 0.0]})
        out = displace_positions(traj, {"mouth": 0.5}, lms)
        moved = out.waypoints[0].pos - traj.waypoints[0].pos
        assert moved.norm() == pytest.approx(P.delta_max, abs=1e-12)
        assert moved.x > 0 and moved.y == 0.0 and moved.z == 0.0

    def test_unknown_landmark_named_in_error(self, simple_traj, body):
        with pytest.raises(KeyError, match="third thumb"):
            displace_positions(simple_traj, {"third thumb": 2.0}, body)

    def test_attraction_strictly_decreases_distance_randomized(self):
        rng = random.Random(42)
        lms = LandmarkSet.from_dict({"mouth": [0.0, 0.0, 0.0]})
        target = Vec3(0.0, 0.0, 0.0)
        for _ in range(1000):
            pos = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
            if pos.norm() < 1e-6:
                continue
            k = rng.uniform(1.01, 3.0)
            traj = Trajectory(
                (
                    Waypoint(0.0, pos, 0.02, 1.0),
                    Waypoint(1.0, pos + Vec3(5.0, 5.0, 5.0), 0.02, 1.0),
                )
            )
            out = displace_positions(traj, {"mouth": k}, lms)
            assert out.waypoints[0].pos.distance_to(target) < pos.distance_to(target)


class TestApply:
    def test_global_velocity(self, body):
        traj = straight_traj([0.02, 0.03])
        out = apply(traj, parse_spec("global:\n  velocity: 2.0"), body)
        assert [w.vel for w in out.waypoints] == [0.04, 0.06]

    def test_empty_spec_bitwise_identity(self, simple_traj, body):
        assert apply(simple_traj, parse_spec(""), body) is simple_traj

    def test_clarification_spec_identity(self, simple_traj, body):
        spec = parse_spec("global:\n  clarification: true")
        assert apply(simple_traj, spec, body) is simple_traj

    def test_stop_only_spec_identity(self, simple_traj, body):
        spec = parse_spec("global:\n  stop: true")
        assert apply(simple_traj, spec, body) is simple_traj

    def test_landmark_then_global_compose_to_identity_at_landmark(self):
        traj = straight_traj([0.02, 0.02], spacing=0.5)
        lms = LandmarkSet.from_dict({"left wrist": [0.0, 0.0, 0.0]})
        first = apply(traj, parse_spec("left wrist:\n  velocity: 1/2.0"), lms)
        second = apply(first, parse_spec("global:\n  velocity: 2.0"), lms)
        assert second.waypoints[0].vel == pytest.approx(traj.waypoints[0].vel, rel=1e-12)

    def test_multi_scope_concurrent(self, body):
        traj = straight_traj([0.02, 0.02, 0.02])
        spec = parse_spec("global:\n  velocity: 2.0\nwaypoint 2:\n  velocity: 1/2.0")
        out = apply(traj, spec, body)
        assert out.waypoints[0].vel == pytest.approx(0.04)
        assert out.waypoints[1].vel == pytest.approx(0.02)

    def test_deterministic_bitwise(self, body):
        traj = straight_traj([0.02, 0.03, 0.04], forces=[1.0, 2.0, 3.0])
        spec = parse_spec(
            "global:\n  velocity: 1.3\nmouth:\n  attract: 1/1.6\n  force: 2.0\nwaypoint 1:\n  force: 1/1.2"
        )
        first = apply(traj, spec, body)
        second = apply(traj, spec, body)
        assert first == second

    def test_deterministic_under_entry_order(self, body):
        # Equal specs whose dicts were built in different insertion orders must
        # produce bitwise-identical trajectories (float products reordered
        # otherwise drift by ulps).
        traj = straight_traj([0.02, 0.03, 0.04], forces=[1.0, 2.0, 3.0])
        forward = parse_spec("mouth:\n  velocity: 1.7\nleft wrist:\n  velocity: 1.3")
        backward = parse_spec("left wrist:\n  velocity: 1.3\nmouth:\n  velocity: 1.7")
        assert list(forward.landmarks) != list(backward.landmarks)
        assert apply(traj, forward, body) == apply(traj, backward, body)

    def test_waypoint_index_zero_rejected(self, body):
        traj = straight_traj([0.02, 0.03])
        spec = parse_spec("waypoint 0:\n  velocity: 2.0")
        with pytest.raises(ValueError, match="out of range"):
            apply(traj, spec, body)

    def test_clamps_enforced_after_any_spec(self, body):
        rng = random.Random(9)
        traj = straight_traj([0.02, 0.05, 0.09], forces=[1.0, 8.0, 14.0])
        current = traj
        for _ in range(20):
            text = rng.choice(
                [
                    "global:\n  velocity: 3.0",
                    "global:\n  force: 3.0",
                    "mouth:\n  velocity: 3.0\n  force: 3.0",
                    "waypoint 2:\n  velocity: 3.0\n  force: 3.0",
                ]
            )
            current = apply(current, parse_spec(text), body)
            for w in current.waypoints:
                assert P.v_min <= w.vel <= P.v_max
                assert 0.0 <= w.force <= P.f_max

    def test_displacement_before_scaling(self):
        # The waypoint starts one sigma from the landmark and is pulled onto it;
        # landmark-scoped scaling must then see d == 0 and apply the full factor.
        lms = LandmarkSet.from_dict({"mouth": [0.07, 0.0, 0.0]})
        traj = Trajectory(
            (
                Waypoint(0.0, Vec3(0.0, 0.0, 0.0), 0.02, 1.0),
                Waypoint(1.0, Vec3(0.0, 5.0, 0.0), 0.02, 1.0),
            )
        )
        spec = parse_spec("mouth:\n  attract: 2.0\n  velocity: 2.0")
        # pull = k * k_p * d = 2 * 0.5 * 0.07 = 0.07 -> lands exactly on the landmark
        out = apply(traj, spec, lms, ApplyParams(k_p=0.5, delta_max=0.2))
        assert out.waypoints[0].pos.x == pytest.approx(0.07, abs=1e-12)
        assert out.waypoints[0].vel == pytest.approx(0.04, abs=1e-14)


class TestApplyParams:
    def test_defaults_match_documented_values(self):
        assert (P.sigma, P.k_p, P.eta, P.rho0) == (0.07, 0.01, 0.5, 0.1)
        assert (P.v_max, P.v_min, P.f_max) == (0.1, 0.005, 15.0)
        assert (P.delta_max, P.eps_d) == (0.05, 1e-6)

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ApplyParams(sigma=0.0)
        with pytest.raises(ValueError):
            ApplyParams(v_min=0.2, v_max=0.1)

    def test_from_mapping_overrides(self):
        params = ApplyParams.from_mapping({"k_p": 0.25})
        assert params.k_p == 0.25 and params.sigma == P.sigma

    def test_from_mapping_rejects_unknown(self):
        with pytest.raises(ValueError, match="warp_speed"):
            ApplyParams.from_mapping({"warp_speed": 9.0})
