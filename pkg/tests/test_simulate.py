"""Trajectory integration, off-grid policy queries, ensemble statistics."""

import numpy as np
import pytest

import switchplan as sp
from switchplan import (ConfigurationError, Dynamics, Grid, NoPolicyError,
                        Policy, Problem, Rect, Region, ValueField,
                        eikonal_problem, evaluate_frozen_policy,
                        extract_policy, make_policy, monte_carlo,
                        open_water_problem, policy_at, run_trajectory,
                        solve_coupled, solve_uncoupled, sweep_solve,
                        two_wind_problem, UNCOUPLED)


def anisotropic_cone(x, target, s, w):
    d = np.asarray(target, dtype=float) - np.asarray(x, dtype=float)
    dw = float(d @ w)
    s2w = s * s - float(w @ w)
    return (-dw + np.sqrt(dw * dw + s2w * float(d @ d))) / s2w


def single_wind_problem(h=1 / 128, wind=(1.5, 0.0), target=(0.5, 0.05)):
    grid = Grid.from_bounds((0, 0), (1, 1), h)
    region = Region(box=Rect((0, 0), (1, 1)), target_points=(target,))
    dyn = Dynamics.constant(2.0, [wind])
    return Problem.build(grid, region, dyn, np.zeros((1, 1)))


class TestPolicyAt:
    def test_linear_field_gives_constant_direction(self):
        p = eikonal_problem(h=1 / 20, speed=1.0, target=(0.5, 0.5))
        values = np.broadcast_to(3.0 * p.coords[..., 0], (1,) + p.grid.shape).copy()
        field = ValueField(values=values,
                           directions=np.full((1,) + p.grid.shape + (2,), np.nan),
                           problem=p)
        policy = Policy(directions=field.directions, source="test")
        for pt in [(0.31, 0.52), (0.5, 0.5), (0.77, 0.13)]:
            d = policy_at(policy, field, pt, 0)
            assert d == pytest.approx([-1.0, 0.0], abs=1e-12)

    def test_gridpoint_matches_stored_direction_on_linear_solution(self):
        # westward wind, u = x / 3.5 solves the single-mode system exactly;
        # stored one-sided directions and the interpolated gradient agree
        p = single_wind_problem(h=1 / 32, wind=(-1.5, 0.0))
        values = np.broadcast_to(p.coords[..., 0] / 3.5,
                                 (1,) + p.grid.shape).copy()
        field = ValueField(values=values,
                           directions=np.full((1,) + p.grid.shape + (2,), np.nan),
                           problem=p)
        policy = extract_policy(field, p)
        ix, iy = 16, 20
        x = p.coords[ix, iy]
        d = policy_at(policy, field, x, 0)
        assert d == pytest.approx(policy.directions[0, ix, iy], abs=1e-6)

    def test_all_sentinel_cell_raises(self):
        p = two_wind_problem(lam=1.0, h=1 / 40)
        values = np.full((2,) + p.grid.shape, np.inf)
        field = ValueField(values=values,
                           directions=np.full((2,) + p.grid.shape + (2,), np.nan),
                           problem=p)
        policy = Policy(directions=field.directions, source="test")
        with pytest.raises(NoPolicyError):
            policy_at(policy, field, (0.47, 0.12), 0)

    def test_cell_straddling_obstacle_renormalizes(self):
        p = two_wind_problem(lam=1.0, h=1 / 40)
        field, _ = solve_coupled(p)
        policy = extract_policy(field, p)
        # just above the obstacle edge: its cell has blocked corners
        d = policy_at(policy, field, (0.5, 0.1626), 0)
        assert np.linalg.norm(d) == pytest.approx(1.0, abs=1e-9)


class TestRunTrajectory:
    def test_straight_line_arrival_time(self):
        # crosswind compensation: rowing against w=(1.5,0) while heading
        # south yields net speed 2*sqrt(1 - 0.5625) toward the target
        p = single_wind_problem(h=1 / 320)
        field, _ = sweep_solve(p)
        policy = extract_policy(field, p)
        rec = run_trajectory(p, policy, field, (0.5, 0.8), 0, dt=1e-3)
        assert rec.outcome == "arrived"
        exact = anisotropic_cone((0.5, 0.8), (0.5, 0.05), 2.0,
                                 np.array([1.5, 0.0]))
        assert rec.outcome_time == pytest.approx(exact, rel=0.02)

    def test_replay_bookkeeping(self):
        p = two_wind_problem(lam=10.0, h=1 / 80)
        field, policy = make_policy(p, sp.COUPLED)
        times = [0.05, 0.1, 0.2, 5.0]
        path = [(t, (1 + k) % 2) for k, t in enumerate(times)]
        rec = run_trajectory(p, policy, field, (0.5, 0.8), 0, mode_path=path)
        applied = [t for t, _ in path if t < rec.outcome_time]
        assert rec.switch_count == len(applied)
        assert [t for t, _, _, _ in rec.switches] == applied
        # mode segments match the switch times
        for t, (sx, sy), old, new in rec.switches:
            k = np.searchsorted(rec.times, t + 1e-12)
            assert rec.modes[k - 1] == old or rec.times[k - 1] == t

    def test_positions_stay_inside_domain(self):
        p = two_wind_problem(lam=10.0, h=1 / 80)
        field, policy = make_policy(p, sp.INFINITE_RATE)
        rng = np.random.default_rng(5)
        rec = run_trajectory(p, policy, field, (0.5, 0.8), 0, rng=rng)
        assert (rec.positions >= -1e-12).all()
        assert (rec.positions <= 1 + 1e-12).all()

    def test_dt_refinement_first_order(self):
        p = single_wind_problem()
        field, _ = sweep_solve(p)
        policy = extract_policy(field, p)
        ts = [run_trajectory(p, policy, field, (0.5, 0.8), 0, dt=dt).outcome_time
              for dt in (4e-3, 2e-3, 1e-3)]
        assert abs(ts[1] - ts[2]) <= abs(ts[0] - ts[1]) + 1e-5

    def test_start_inside_obstacle_rejected(self):
        p = two_wind_problem(lam=1.0, h=1 / 40)
        field, policy = make_policy(p, sp.COUPLED)
        with pytest.raises(ConfigurationError):
            run_trajectory(p, policy, field, (0.5, 0.12), 0,
                           rng=np.random.default_rng(0))

    def test_rates_require_rng_or_path(self):
        p = two_wind_problem(lam=1.0, h=1 / 40)
        field, policy = make_policy(p, sp.COUPLED)
        with pytest.raises(ConfigurationError):
            run_trajectory(p, policy, field, (0.5, 0.8), 0)

    def test_capture_at_start(self):
        p = single_wind_problem(h=1 / 64)
        field, _ = sweep_solve(p)
        policy = extract_policy(field, p)
        rec = run_trajectory(p, policy, field, (0.5, 0.052), 0, dt=1e-3)
        assert rec.outcome == "arrived"
        assert rec.outcome_time == 0.0

    def test_timeout(self):
        p = single_wind_problem(h=1 / 64)
        field, _ = sweep_solve(p)
        policy = extract_policy(field, p)
        rec = run_trajectory(p, policy, field, (0.5, 0.8), 0, dt=1e-3, t_max=0.05)
        assert rec.outcome == "timed_out"
        assert rec.outcome_time == pytest.approx(0.05)


class TestMonteCarlo:
    def test_seed_determinism(self):
        p = two_wind_problem(lam=1.0, h=1 / 80)
        field, policy = make_policy(p, sp.COUPLED)
        a = monte_carlo(p, policy, field, (0.5, 0.8), 0, N=40, seed=9)
        b = monte_carlo(p, policy, field, (0.5, 0.8), 0, N=40, seed=9)
        assert np.array_equal(a.arrival_times, b.arrival_times)
        assert np.array_equal(a.switch_counts, b.switch_counts)
        assert a.collision_fraction == b.collision_fraction

    def test_deterministic_dynamics_all_runs_identical(self):
        p = single_wind_problem(h=1 / 64)
        field, _ = sweep_solve(p)
        policy = extract_policy(field, p)
        stats = monte_carlo(p, policy, field, (0.5, 0.8), 0, N=12, seed=3)
        assert stats.arrivals == 12
        assert stats.arrival_se == 0.0
        assert np.unique(stats.arrival_times).size == 1

    def test_outcome_counts_partition_runs(self):
        p = two_wind_problem(lam=10.0, h=1 / 80)
        field, policy = make_policy(p, sp.INFINITE_RATE)
        stats = monte_carlo(p, policy, field, (0.5, 0.8), 0, N=60, seed=11)
        assert stats.arrivals + stats.collisions + stats.timeouts == stats.runs
        assert stats.collisions > 0  # the mode-blind planner hits the wall

    def test_mean_matches_frozen_policy_evaluation(self):
        # Monte-Carlo consistency with the linear cross-evaluation
        p = two_wind_problem(lam=1.0, h=1 / 80)
        unc = solve_uncoupled(p)
        zero = p.with_rates(np.zeros((2, 2)))
        policy = extract_policy(unc, zero, source=UNCOUPLED)
        crossed = evaluate_frozen_policy(p, policy)
        stats = monte_carlo(p, policy, unc, (0.5, 0.8), 0, N=400, seed=21)
        assert stats.collisions == 0
        window = 3 * stats.arrival_se + 5 * p.grid.h
        assert abs(stats.arrival_mean - crossed.at((0.5, 0.8), 0)) <= window
