"""Value functions of the two-wind harbor for several switching rates.

Solves the coupled system at rates 0, 1, 10 and 50 plus the infinite-rate
limit, and draws one panel per (rate, mode).  The shockline above the
obstacle moves sideways and blurs as the rate grows, then sharpens again.

Run:  python demos/value_functions.py  (writes demos/output/value_functions.png)
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import switchplan as sp

H = 1.0 / 160          # half the paper resolution keeps this demo quick
RATES = [0.0, 1.0, 10.0, 50.0]

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

fields = {}
for lam in RATES:
    problem = sp.two_wind_problem(lam=lam, h=H)
    field, report = sp.solve_coupled(problem)
    fields[lam] = field
    print(f"rate {lam:>5}: {report.sweeps} sweeps, "
          f"mode gap {field.mode_gap():.4f}")

inf_field = sp.solve_infinite_rate(sp.two_wind_problem(lam=1.0, h=H))
print(f"infinite-rate limit solved; value at start "
      f"{inf_field.at((0.5, 0.8), 0):.4f}")

fig, axes = plt.subplots(3, len(RATES), figsize=(4 * len(RATES), 11),
                         sharex=True, sharey=True)
extent = (0, 1, 0, 1)
vmax = max(np.nanmax(np.where(np.isfinite(f.values), f.values, np.nan))
           for f in fields.values())
for col, lam in enumerate(RATES):
    for mode in (0, 1):
        ax = axes[mode, col]
        V = fields[lam].values[mode].T
        img = ax.imshow(np.where(np.isfinite(V), V, np.nan), origin="lower",
                        extent=extent, vmin=0, vmax=vmax, cmap="viridis")
        ax.add_patch(plt.Rectangle((0.1, 0.1), 0.75, 0.05, color="0.2"))
        ax.plot(0.5, 0.05, "mo", ms=6)
        arrow = 0.06 if mode == 0 else -0.06
        ax.annotate("", xy=(0.5 + arrow, 0.93), xytext=(0.5 - arrow, 0.93),
                    arrowprops=dict(arrowstyle="->", color="w"))
        ax.set_title(f"rate {lam:g}, mode {mode}")
    V = inf_field.values[0].T
    ax = axes[2, col]
    ax.imshow(np.where(np.isfinite(V), V, np.nan), origin="lower",
              extent=extent, vmin=0, vmax=vmax, cmap="viridis")
    ax.add_patch(plt.Rectangle((0.1, 0.1), 0.75, 0.05, color="0.2"))
    ax.set_title("infinite-rate limit")
fig.colorbar(img, ax=axes, shrink=0.7, label="minimal expected time")
fig.suptitle("Two-wind harbor: value functions per mode and switching rate")
fig.savefig(out_dir / "value_functions.png", dpi=110)
print(f"wrote {out_dir / 'value_functions.png'}")
