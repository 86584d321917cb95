"""
Trajectories, landmarks, and the symbolic context
=================================================

Build a small bathing-style motion, sample its interpolated state, label each
waypoint with its nearest body landmark, and look at the YAML sketch the
utterance interpreter receives as trajectory context.
"""

from pathlib import Path

from trajtalk import interpolate_state, load_landmarks, load_trajectory, to_context_yaml

DATA = Path(__file__).resolve().parent.parent / "data"

traj = load_trajectory(DATA / "bathing_trajectory.yaml")
body = load_landmarks(DATA / "landmarks.yaml")

print(f"{len(traj)} waypoints, {traj.duration:.1f} s total")

# The executor follows straight segments with speed and force linear in time;
# sampling halfway through the motion:
mid = traj.start_time + traj.duration / 2
pos, vel, force = interpolate_state(traj, mid)
print(f"state at t={mid:.1f}s: pos=({pos.x:.2f}, {pos.y:.2f}, {pos.z:.2f}), "
      f"vel={vel:.3f} m/s, force={force:.1f} N")

# The interpreter never sees coordinates, only which landmark each waypoint
# is near (within 0.10 m by default). Four wrist-to-elbow wipes show up as a
# repeating label pattern:
print()
print(to_context_yaml(traj, body))
