"""
Gaussian decay and potential-field displacement
===============================================

The two mechanisms behind landmark-scoped changes: velocity/force multipliers
fade with a Gaussian of the distance to the landmark, and `attract` fields
move waypoints along a single capped step of an attractive/repulsive
potential gradient.

Writes `potential_fields.png` next to this script if matplotlib is available.
"""

from pathlib import Path

from trajtalk import (
    ApplyParams,
    LandmarkSet,
    Trajectory,
    displace_positions,
    gaussian_factor,
    parse_spec,
    scale_landmark,
)
from trajtalk.trajectory import Landmark
from trajtalk.geometry import Vec3

params = ApplyParams()

# "Slower near my wrist": a k=1/2 multiplier is full strength at the wrist
# and fades to no-op within a few sigma (sigma = 0.07 m).
for d in (0.0, 0.035, 0.07, 0.14, 0.28):
    print(f"factor(k=1/2) at d={d:.3f} m: {gaussian_factor(0.5, d, params.sigma):.4f}")

# A straight pass 5 cm from a landmark, slowed down around it:
records = [
    {"t": float(i), "pos": [0.05 * i - 0.25, 0.05, 0.0], "vel": 0.05, "force": 1.0}
    for i in range(11)
]
traj = Trajectory.from_records(records)
wrist = Landmark("left wrist", Vec3(0.0, 0.0, 0.0))
slowed = scale_landmark(traj, wrist, v_mult=0.5, params=params)
print("\nvelocities after 'slower near my left wrist':")
print("  " + " ".join(f"{w.vel:.3f}" for w in slowed.waypoints))

# "Closer to my wrist": every waypoint takes one capped step toward the
# landmark; repeating the command keeps pulling the path in.
body = LandmarkSet([wrist])
spec = {"left wrist": 2.0}
strong = ApplyParams(k_p=0.25)  # the default gain is conservative; see docs
current = traj
closest = [min(w.pos.distance_to(wrist.pos) for w in current.waypoints)]
for _ in range(5):
    current = displace_positions(current, spec, body, strong)
    closest.append(min(w.pos.distance_to(wrist.pos) for w in current.waypoints))
print("\nmin distance to wrist after each 'closer' step:")
print("  " + " -> ".join(f"{d:.3f}" for d in closest))

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("\nmatplotlib not installed; skipping the plot")
else:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ds = [i * 0.005 for i in range(81)]
    for k in (3.0, 2.0, 0.5, 1 / 3):
        ax1.plot(ds, [gaussian_factor(k, d, params.sigma) for d in ds], label=f"k={k:.2f}")
    ax1.set(xlabel="distance to landmark (m)", ylabel="scaling factor", title="Gaussian decay")
    ax1.legend()
    steps = [traj]
    for _ in range(5):
        steps.append(displace_positions(steps[-1], spec, body, strong))
    for i, t in enumerate(steps):
        xs = [w.pos.x for w in t.waypoints]
        ys = [w.pos.y for w in t.waypoints]
        ax2.plot(xs, ys, marker=".", alpha=0.3 + 0.7 * i / 5, color="tab:blue")
    ax2.plot(0, 0, "r*", markersize=14, label="left wrist")
    ax2.set(xlabel="x (m)", ylabel="y (m)", title="repeated 'closer' commands")
    ax2.legend()
    out = Path(__file__).resolve().parent / "potential_fields.png"
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    print(f"\nwrote {out}")
