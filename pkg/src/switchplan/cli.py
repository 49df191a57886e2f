"""Command-line interface: solve / simulate / compare / ring.

Exit codes: 0 success, 2 configuration error, 3 non-convergence, 4 runtime
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import planners
from .config import (RunConfig, build_problem, load_config, real_rates_from,
                     serialize_config)
from .errors import ConfigurationError, ConvergenceError, RateMatrixError
from .fileio import (write_compare_json, write_field_csv, write_report_json,
                     write_stats_json, write_trajectories_jsonl)
from .markov import validate_rates
from .ring import mode_angles, theta_variability_bound
from .simulate import monte_carlo, run_trajectory
from .sweep import evaluate_frozen_policy, sweep_solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3
EXIT_RUNTIME = 4

_PLANNER_NAMES = {"coupled": planners.COUPLED, "uncoupled": planners.UNCOUPLED,
                  "infinite": planners.INFINITE_RATE}


def _out_dir(cfg: RunConfig, args) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "planner", None):
        cfg.solver.planner = args.planner
    if getattr(args, "scheme", None):
        cfg.solver.scheme = args.scheme
    if getattr(args, "seed", None) is not None:
        cfg.simulation.seed = args.seed
    return cfg.validate()


def _solve_fields(problem, cfg: RunConfig):
    """Solve with the configured planner; returns (field, report_or_None)."""
    planner = cfg.solver.planner
    scheme = cfg.solver.scheme
    kw = {"max_sweeps": cfg.solver.max_sweeps}
    if planner == "coupled":
        return sweep_solve(problem, scheme=scheme, **kw)
    if planner == "uncoupled":
        field = planners.solve_uncoupled(problem, scheme=scheme, **kw)
        return field, None
    field, report = sweep_solve(planners.averaged_problem(problem),
                                scheme=scheme, **kw)
    return field, report


def cmd_solve(cfg: RunConfig, args) -> int:
    out = _out_dir(cfg, args)
    problem = build_problem(cfg)
    field, report = _solve_fields(problem, cfg)
    gaps = {}
    n = field.mode_count
    for i in range(n):
        write_field_csv(out / f"u_mode{i}.csv", problem.grid, field.values[i], i)
    for i in range(n):
        for j in range(i + 1, n):
            gaps[f"{i}-{j}"] = field.mode_gap(i, j)
    extra = {"planner": cfg.solver.planner, "mode_gaps": gaps}
    if report is not None:
        write_report_json(out / "report.json", report, extra)
        print(f"solve: {report.sweeps} sweeps, final change {report.final_change:.2e}, "
              f"{report.unreachable} unreachable point-modes")
    else:
        (out / "report.json").write_text(json.dumps(
            {"schema": "solve-report/1", **extra}, indent=2) + "\n")
        print("solve: per-mode independent solves finished")
    for key, g in gaps.items():
        print(f"  sup gap modes {key}: {g:.6f}")
    print(f"fields written to {out}")
    return EXIT_OK


def _policy_for(problem, name, scheme):
    field, policy = planners.make_policy(problem, _PLANNER_NAMES[name], scheme=scheme)
    return field, policy


def cmd_simulate(cfg: RunConfig, args) -> int:
    out = _out_dir(cfg, args)
    problem = build_problem(cfg)
    sim = cfg.simulation
    rates_real = real_rates_from(cfg, problem)
    scheme = cfg.solver.scheme
    x0 = tuple(sim.start)
    if args.replay:
        times = _read_replay(args.replay)
        records = []
        for name in ("coupled", "uncoupled", "infinite"):
            field, policy = _policy_for(problem, name, scheme)
            path = _alternating_path(sim.start_mode, times, problem.mode_count)
            rec = run_trajectory(problem, policy, field, x0, sim.start_mode,
                                 rates_real=rates_real, dt=sim.dt,
                                 t_max=sim.t_max, r_cap=sim.capture_radius,
                                 mode_path=path)
            records.append(rec)
            print(f"replay {name}: {rec.outcome} at t={rec.outcome_time:.4f} "
                  f"after {rec.switch_count} switches")
        write_trajectories_jsonl(out / "trajectories.jsonl", records,
                                 stride=sim.sample_stride)
        summary = [{"policy": r.policy, "outcome": r.outcome,
                    "time": r.outcome_time, "switches": r.switch_count}
                   for r in records]
        (out / "replay_summary.json").write_text(json.dumps(
            {"schema": "replay-summary/1", "switch_times": times,
             "runs": summary}, indent=2) + "\n")
        return EXIT_OK
    field, policy = _policy_for(problem, cfg.solver.planner, scheme)
    stats = monte_carlo(problem, policy, field, x0, sim.start_mode,
                        rates_real=rates_real, N=sim.runs, seed=sim.seed,
                        dt=sim.dt, t_max=sim.t_max, r_cap=sim.capture_radius)
    write_stats_json(out / "stats.json", stats,
                     {"start": list(x0), "start_mode": sim.start_mode})
    keep = min(sim.runs, 20)
    records = []
    for k in range(keep):
        rng = np.random.default_rng(np.random.SeedSequence(sim.seed).spawn(sim.runs)[k])
        records.append(run_trajectory(problem, policy, field, x0, sim.start_mode,
                                      rates_real=rates_real, dt=sim.dt, rng=rng,
                                      t_max=sim.t_max, r_cap=sim.capture_radius))
    write_trajectories_jsonl(out / "trajectories.jsonl", records,
                             stride=sim.sample_stride)
    mean = "n/a" if not stats.arrivals else f"{stats.arrival_mean:.4f}"
    print(f"simulate[{cfg.solver.planner}]: N={stats.runs} arrivals={stats.arrivals} "
          f"mean={mean} se={stats.arrival_se:.4f} "
          f"collision_fraction={stats.collision_fraction:.3f}")
    print(f"stats written to {out}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    out = _out_dir(cfg, args)
    problem = build_problem(cfg)
    scheme = cfg.solver.scheme
    u_r, _ = sweep_solve(problem, scheme=scheme, max_sweeps=cfg.solver.max_sweeps)
    rows = []
    names = ["coupled"] + list(cfg.compare.planners)
    for name in names:
        field_p, policy = _policy_for(problem, name, scheme)
        u_rp = evaluate_frozen_policy(problem, policy)
        for pt in cfg.compare.points:
            for i in range(problem.mode_count):
                ur = u_r.at(pt, i)
                up = field_p.at(pt, i)
                urp = u_rp.at(pt, i)
                deg = (urp - ur) / ur * 100.0 if np.isfinite(urp) else None
                rows.append({"planner": name, "point": list(pt), "mode": i,
                             "u_real": ur, "u_planner": up,
                             "u_cross": None if not np.isfinite(urp) else urp,
                             "degradation_pct": deg})
    write_compare_json(out / "compare.json", rows)
    print(f"{'planner':<10} {'point':<14} {'mode':<4} {'u_r':>8} {'u_p':>8} "
          f"{'u_rp':>8} {'degr%':>7}")
    for r in rows:
        urp = "inf" if r["u_cross"] is None else f"{r['u_cross']:8.4f}"
        deg = "inf" if r["degradation_pct"] is None else f"{r['degradation_pct']:7.2f}"
        print(f"{r['planner']:<10} {str(tuple(r['point'])):<14} {r['mode']:<4} "
              f"{r['u_real']:8.4f} {r['u_planner']:8.4f} {urp:>8} {deg:>7}")
    print(f"table written to {out / 'compare.json'}")
    return EXIT_OK


def cmd_ring(cfg: RunConfig, args) -> int:
    out = _out_dir(cfg, args)
    cfg.ring.enabled = True
    problem = build_problem(cfg)
    field, report = sweep_solve(problem, scheme=cfg.solver.scheme,
                                max_sweeps=cfg.solver.max_sweeps)
    n = problem.mode_count
    for i in range(n):
        write_field_csv(out / f"u_mode{i}.csv", problem.grid, field.values[i], i)
    th = mode_angles(n)
    checks = []
    worst = -np.inf
    for i in range(n):
        for j in range(i + 1, n):
            gap = field.mode_gap(i, j)
            bound = theta_variability_bound(cfg.ring.sigma, th[i], th[j]) \
                + 5.0 * problem.grid.h
            checks.append({"i": i, "j": j, "gap": gap, "bound": bound,
                           "ok": bool(gap <= bound)})
            worst = max(worst, gap - bound)
    write_report_json(out / "report.json", report,
                      {"planner": "coupled", "ring_modes": n,
                       "sigma": cfg.ring.sigma, "angle_bound_checks": checks})
    ok = all(c["ok"] for c in checks)
    print(f"ring: {n} modes, {report.sweeps} sweeps; "
          f"angle-variability bound {'holds' if ok else 'VIOLATED'} "
          f"for all {len(checks)} pairs (worst slack {worst:+.3e})")
    print(f"fields written to {out}")
    return EXIT_OK if ok else EXIT_RUNTIME


def _read_replay(path) -> list:
    text = Path(path).read_text().strip()
    if text.startswith("["):
        times = json.loads(text)
    else:
        times = [float(tok) for tok in text.split()]
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigurationError("replay switch times must be strictly increasing")
    return times


def _alternating_path(start_mode: int, times, n_modes: int):
    mode = start_mode
    path = []
    for t in times:
        mode = (mode + 1) % n_modes
        path.append((t, mode))
    return path


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="switchplan",
                                 description="Path planning under randomly "
                                             "switching dynamics")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("solve", cmd_solve), ("simulate", cmd_simulate),
                     ("compare", cmd_compare), ("ring", cmd_ring)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--planner", choices=("coupled", "uncoupled", "infinite"),
                       default=None)
        p.add_argument("--scheme", choices=("euler", "semilag"), default=None)
        if name == "simulate":
            p.add_argument("--replay", default=None,
                           help="file with explicit switch times")
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        return args.func(cfg, args)
    except (ConfigurationError, RateMatrixError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except Exception as exc:  # pragma: no cover - defensive
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
