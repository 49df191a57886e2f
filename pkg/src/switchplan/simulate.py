"""Monte-Carlo simulation of the controlled random-switching process.

Trajectories follow the feedback policy of a converged value field with
explicit Euler steps (control held constant over each dt window), an exactly
pre-sampled mode path (the step straddling a switch is split at the switch
instant), segment-based collision detection against the obstacles and the
domain box, and arrival inside a capture disk around the target point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .errors import ConfigurationError, NoPolicyError
from .markov import sample_mode_path, validate_rates
from .model import Problem
from .planners import Policy
from .sweep import ValueField

ARRIVED = "arrived"
COLLIDED = "collided"
TIMED_OUT = "timed_out"

_STATUS = {_k.ARRIVED: ARRIVED, _k.COLLIDED: COLLIDED, _k.TIMED_OUT: TIMED_OUT}


@dataclass(eq=False)
class TrajectoryRecord:
    """One simulated run: sampled states, switch events and the outcome."""

    times: np.ndarray
    positions: np.ndarray   # (m, 2)
    modes: np.ndarray
    switches: list          # (time, (x, y), old_mode, new_mode)
    outcome: str
    outcome_time: float
    outcome_position: tuple
    policy: str

    @property
    def switch_count(self) -> int:
        return len(self.switches)


@dataclass(eq=False)
class SimStats:
    """Ensemble statistics of a Monte-Carlo batch."""

    runs: int
    seed: int
    policy: str
    arrivals: int
    collisions: int
    timeouts: int
    arrival_times: np.ndarray
    switch_counts: np.ndarray
    collision_times: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def arrival_mean(self) -> float:
        return float(self.arrival_times.mean()) if self.arrivals else np.nan

    @property
    def arrival_se(self) -> float:
        if self.arrivals < 2:
            return 0.0
        return float(self.arrival_times.std(ddof=1) / np.sqrt(self.arrivals))

    @property
    def collision_fraction(self) -> float:
        return self.collisions / self.runs


def _geometry_arrays(problem: Problem):
    obstacles = np.array([r.as_array() for r in problem.region.obstacles],
                         dtype=float).reshape(-1, 4)
    box = problem.region.box.as_array()
    return obstacles, box


def _target_point(problem: Problem):
    """The capture-disk center: the (single) target point, or its gridpoint."""
    if problem.region.target_points:
        return tuple(problem.region.target_points[0])
    idx = problem.target_indices()[0]
    return tuple(problem.grid.coordinate(idx))


def policy_at(policy: Policy, field: ValueField, x, i: int) -> np.ndarray:
    """Unit control direction at an off-grid point ``x`` in mode ``i``.

    Bilinearly interpolates the mode-``i`` value grid (sentinel corners are
    excluded by renormalizing the weights over the finite corners), forms the
    gradient of the interpolant by central differences at +-h/2 and returns
    the Eikonal-form direction ``-g/||g||``.  With fewer than two finite
    corners the nearest stored grid direction is used instead.

    Raises
    ------
    NoPolicyError
        When the containing cell holds no finite value at all.
    """
    prob = field.problem
    grid = prob.grid
    a1, a2, ok = _k.policy_dir(field.values[i], policy.directions[i],
                               grid.lo[0], grid.lo[1], grid.h,
                               float(x[0]), float(x[1]))
    if not ok:
        raise NoPolicyError(f"no value information around {tuple(x)} in mode {i}")
    return np.array([a1, a2])


def _replay_modes(start_mode: int, times, n_modes: int):
    """Mode path from explicit switch times: cycle through the modes.

    With two modes this alternates, matching a symmetric two-mode chain."""
    mode = start_mode
    out = []
    for t in times:
        mode = (mode + 1) % n_modes
        out.append((float(t), mode))
    return out


def run_trajectory(problem: Problem, policy: Policy, field: ValueField,
                   x0, i0: int, rates_real=None, dt: float = 1e-3,
                   rng: np.random.Generator | None = None,
                   t_max: float = 50.0, r_cap: float | None = None,
                   mode_path=None, record: bool = True) -> TrajectoryRecord:
    """Simulate one run from ``(x0, i0)``.

    The mode path is sampled exactly from ``rates_real`` (defaulting to the
    problem's own rates) unless an explicit ``mode_path`` of
    ``(time, new_mode)`` pairs is supplied for replay.
    """
    grid = problem.grid
    x0 = np.asarray(x0, dtype=float)
    if not grid.contains(x0):
        raise ConfigurationError(f"start {tuple(x0)} outside the domain")
    for r in problem.region.obstacles:
        if r.contains(x0):
            raise ConfigurationError(f"start {tuple(x0)} inside an obstacle")
    if policy.mode_count != problem.mode_count or field.mode_count != problem.mode_count:
        raise ConfigurationError("policy/field mode count does not match the problem")
    if dt <= 0:
        raise ConfigurationError("dt must be positive")
    rcap = 2.0 * grid.h if r_cap is None else float(r_cap)
    lam = validate_rates(problem.rates if rates_real is None else rates_real)
    if mode_path is None:
        if (-np.diag(lam) > 0).any():
            if rng is None:
                raise ConfigurationError("switching rates need an rng (or a mode_path)")
            mode_path = sample_mode_path(lam, i0, t_max, rng)
        else:
            mode_path = []
    sw_t = np.array([t for t, _ in mode_path], dtype=float)
    sw_m = np.array([m for _, m in mode_path], dtype=np.int64)
    obstacles, box = _geometry_arrays(problem)
    tgx, tgy = _target_point(problem)
    f = problem.fields
    (status, t_end, xe, ye, n_applied, nrec,
     rec_t, rec_x, rec_y, rec_m, sw_x, sw_y) = _k.trajectory(
        field.values, policy.directions, f.speed, f.wind,
        grid.lo[0], grid.lo[1], grid.h, obstacles, box,
        tgx, tgy, rcap, float(x0[0]), float(x0[1]), int(i0),
        sw_t, sw_m, float(dt), float(t_max), record)
    switches = []
    mode = int(i0)
    for k in range(n_applied):
        switches.append((float(sw_t[k]), (float(sw_x[k]), float(sw_y[k])),
                         mode, int(sw_m[k])))
        mode = int(sw_m[k])
    times = rec_t[:nrec].copy()
    positions = np.stack([rec_x[:nrec], rec_y[:nrec]], axis=1)
    modes = rec_m[:nrec].copy()
    return TrajectoryRecord(times=times, positions=positions, modes=modes,
                            switches=switches, outcome=_STATUS[status],
                            outcome_time=float(t_end),
                            outcome_position=(float(xe), float(ye)),
                            policy=policy.source)


def monte_carlo(problem: Problem, policy: Policy, field: ValueField,
                x0, i0: int, rates_real=None, N: int = 200,
                seed: int = 0, dt: float = 1e-3, t_max: float = 50.0,
                r_cap: float | None = None) -> SimStats:
    """Run ``N`` independent trajectories with per-run rng streams derived
    from the master seed; deterministic for a fixed seed."""
    if N < 1:
        raise ConfigurationError("N must be at least 1")
    lam = validate_rates(problem.rates if rates_real is None else rates_real)
    streams = np.random.SeedSequence(seed).spawn(N)
    arrivals = []
    collisions = []
    switch_counts = np.zeros(N, dtype=np.int64)
    n_arr = n_col = n_to = 0
    for k in range(N):
        rng = np.random.default_rng(streams[k])
        rec = run_trajectory(problem, policy, field, x0, i0, rates_real=lam,
                             dt=dt, rng=rng, t_max=t_max, r_cap=r_cap,
                             record=False)
        switch_counts[k] = rec.switch_count
        if rec.outcome == ARRIVED:
            n_arr += 1
            arrivals.append(rec.outcome_time)
        elif rec.outcome == COLLIDED:
            n_col += 1
            collisions.append(rec.outcome_time)
        else:
            n_to += 1
    return SimStats(runs=N, seed=seed, policy=policy.source,
                    arrivals=n_arr, collisions=n_col, timeouts=n_to,
                    arrival_times=np.array(arrivals),
                    switch_counts=switch_counts,
                    collision_times=np.array(collisions))
