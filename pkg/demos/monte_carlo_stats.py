"""Arrival-time statistics of the three planners under real switching.

200 runs per planner from the same start, at real switching rates 1 and 10.
Scatter of arrival times (colored by the number of switches experienced),
with the observed average, the planner's own expectation and the true
optimum overlaid.  The mode-blind infinite-rate planner collides in a
sizeable fraction of runs; its scatter shows only the safe arrivals.

Run:  python demos/monte_carlo_stats.py
      (writes demos/output/monte_carlo_rate{1,10}.png)
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import switchplan as sp

H = 1.0 / 320
N = 200
START = (0.5, 0.8)
START_MODE = 0
SEED = 20240101

out = pathlib.Path(__file__).parent / "output"
out.mkdir(exist_ok=True)

for rate in (1.0, 10.0):
    problem = sp.two_wind_problem(lam=rate, h=H)
    u_opt = sp.solve_coupled(problem)[0].at(START, START_MODE)
    fig, axes = plt.subplots(1, 3, figsize=(15, 4.2), sharey=True)
    for ax, planner in zip(axes, (sp.COUPLED, sp.UNCOUPLED, sp.INFINITE_RATE)):
        field, policy = sp.make_policy(problem, planner)
        stats = sp.monte_carlo(problem, policy, field, START, START_MODE,
                               N=N, seed=SEED)
        planned = field.at(START, START_MODE)
        print(f"rate {rate:>4} {planner:>14}: mean {stats.arrival_mean:.4f} "
              f"(se {stats.arrival_se:.4f}), collisions "
              f"{stats.collision_fraction:.1%}")
        arrived_switches = stats.switch_counts[:len(stats.arrival_times)]
        sc = ax.scatter(range(stats.arrivals), stats.arrival_times,
                        c=arrived_switches[:stats.arrivals], cmap="plasma", s=14)
        ax.axhline(stats.arrival_mean, color="g",
                   label=f"observed mean {stats.arrival_mean:.3f}")
        ax.axhline(planned, color="r", ls="--",
                   label=f"planner expectation {planned:.3f}")
        ax.axhline(u_opt, color="purple", ls=":",
                   label=f"optimum {u_opt:.3f}")
        title = planner
        if stats.collisions:
            title += f"  ({stats.collision_fraction:.0%} collide)"
        ax.set_title(title)
        ax.set_xlabel("run (arrived only)")
        ax.legend(fontsize=8)
    axes[0].set_ylabel("arrival time")
    fig.colorbar(sc, ax=axes, shrink=0.8, label="switches before arrival")
    fig.suptitle(f"{N} simulations per planner, real switching rate {rate:g}")
    fig.savefig(out / f"monte_carlo_rate{rate:g}.png", dpi=110)
    print(f"wrote {out / f'monte_carlo_rate{rate:g}.png'}")
