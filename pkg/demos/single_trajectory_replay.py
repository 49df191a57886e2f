"""Controlled comparison of three planners on one switch sequence.

The same wind-switch times drive a boat steered by the rate-aware (coupled)
policy, the no-switch (uncoupled) policy and the mode-blind infinite-rate
policy.  The rate-aware planner arrives first; the infinite-rate planner
cuts too close to the obstacle and collides.

Run:  python demos/single_trajectory_replay.py
      (writes demos/output/single_trajectory_replay.png)
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

import switchplan as sp

H = 1.0 / 320
RATE = 10.0
SWITCH_TIMES = [0.029, 0.064, 0.098, 0.159, 0.285, 0.689, 0.706]
START = (0.5, 0.8)
START_MODE = 0         # wind initially blowing east

out = pathlib.Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

problem = sp.two_wind_problem(lam=RATE, h=H)
path = [(t, (START_MODE + 1 + k) % 2) for k, t in enumerate(SWITCH_TIMES)]

fig, axes = plt.subplots(1, 3, figsize=(15, 5), sharex=True, sharey=True)
for ax, planner in zip(axes, (sp.COUPLED, sp.UNCOUPLED, sp.INFINITE_RATE)):
    field, policy = sp.make_policy(problem, planner)
    rec = sp.run_trajectory(problem, policy, field, START, START_MODE,
                            mode_path=path)
    print(f"{planner:>14}: {rec.outcome} at t={rec.outcome_time:.3f} "
          f"after {rec.switch_count} switches")
    xs, ys = rec.positions[:, 0], rec.positions[:, 1]
    colors = ["k" if m == 0 else "w" for m in rec.modes]
    ax.set_facecolor("#9fb8c8")
    ax.scatter(xs, ys, c=colors, s=3)
    for (_, (sx, sy), _, _) in rec.switches:
        ax.plot(sx, sy, "s", color="purple", ms=7, mfc="none")
    ax.add_patch(plt.Rectangle((0.1, 0.1), 0.75, 0.05, color="0.2"))
    ax.plot(*START, "b*", ms=12)
    ax.plot(0.5, 0.05, "mo", ms=9)
    if rec.outcome == "collided":
        ax.plot(*rec.outcome_position, "rx", ms=12, mew=3)
    ax.set_title(f"{planner}: {rec.outcome} at t={rec.outcome_time:.3f}")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
fig.suptitle("One switch sequence, three planners "
             "(black segments: east wind, white: west)")
fig.tight_layout()
fig.savefig(out / "single_trajectory_replay.png", dpi=110)
print(f"wrote {out / 'single_trajectory_replay.png'}")
