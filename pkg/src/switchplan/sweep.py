"""Gauss-Seidel sweeping over the coupled grid.

The solver alternates through the four geometric orderings (from SW, SE, NE,
NW), recomputes every active gridpoint/mode with the selected update
operator, accepts a value only when strictly smaller, and stops once the
largest change in a sweep falls below the tolerance.  Active flags skip
points none of whose dependencies changed; disabling them gives bit-identical
results under the same schedule.

The same engine evaluates a frozen feedback policy under (possibly
different) switching rates: each update is then the simplex step at the
orthant and weights implied by the frozen velocity.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from .errors import ConfigurationError, ConvergenceError
from .model import BLOCKED, FREE, TARGET, Problem
from .updates import require_timestep_validity

_SCHEMES = {"euler": 0, "semilag": 1}

#: Default cap on the number of sweeps before declaring non-convergence.
DEFAULT_MAX_SWEEPS = 10000


@dataclass(eq=False)
class ValueField:
    """Converged per-mode value arrays with the recorded update directions.

    ``values[i]`` holds mode ``i`` on the grid with ``+inf`` on blocked and
    unreached points; ``directions[i]`` the control direction of the winning
    update (NaN where none).
    """

    values: np.ndarray      # (n_modes, n1, n2)
    directions: np.ndarray  # (n_modes, n1, n2, 2)
    problem: Problem

    @property
    def mode_count(self) -> int:
        return self.values.shape[0]

    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.values)

    def mode_gap(self, i: int = 0, j: int = 1) -> float:
        """Sup-norm gap between two modes over points finite in both."""
        both = np.isfinite(self.values[i]) & np.isfinite(self.values[j])
        if not both.any():
            return 0.0
        return float(np.max(np.abs(self.values[i][both] - self.values[j][both])))

    def at_index(self, idx, i: int = 0) -> float:
        return float(self.values[(i,) + tuple(idx)])

    def at(self, point, i: int = 0) -> float:
        """Value at an exact gridpoint location."""
        return self.at_index(self.problem.grid.snap(point), i)


@dataclass
class SolveReport:
    """Per-solve bookkeeping: sweep count, change history, wall time."""

    sweeps: int = 0
    final_change: float = np.inf
    wall_time: float = 0.0
    history: list = field(default_factory=list)
    unreachable: int = 0
    scheme: str = "euler"
    orderings: tuple = (0, 1, 2, 3)


def _coupling_ceiling(problem: Problem) -> float:
    """Rigorous upper bound on any reachable value, used to cap sentinel
    cross-mode inputs of the point-implicit Eulerian coupling.

    A grid path visits at most every free point, each leg traversable at
    speed >= min(speed - ||wind||), so values never exceed
    cost_bound * n_free * h / margin.  Doubled for slack.
    """
    n_free = int(np.count_nonzero(problem.labels != BLOCKED))
    bound = (problem.dynamics.cost_bound * n_free * problem.grid.h
             / problem.min_margin)
    return 2.0 * bound + 1.0


def _init_state(problem: Problem):
    """Targets at q, everything else unreached; flags seeded on the
    influence sets of the target points (all modes are set there, so the
    union covers every mode at each free neighbor for both schemes)."""
    n = problem.mode_count
    n1, n2 = problem.grid.shape
    labels = problem.labels
    U = np.full((n, n1, n2), np.inf)
    tmask = labels == TARGET
    q = problem.terminal_values
    for i in range(n):
        U[i][tmask] = q[tmask]
    dirs = np.full((n, n1, n2, 2), np.nan)
    active = np.zeros((n, n1, n2), dtype=bool)
    for (tx, ty) in zip(*np.nonzero(tmask)):
        for dx, dy in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            jx, jy = tx + dx, ty + dy
            if 0 <= jx < n1 and 0 <= jy < n2 and labels[jx, jy] == FREE:
                active[:, jx, jy] = True
    return U, dirs, active


def _run_sweeps(problem, U, dirs, active, scheme_code, ceiling,
                use_active_flags, max_sweeps, orderings, tol):
    f = problem.fields
    labels = problem.labels
    lam = problem.rates
    h = problem.grid.h
    report = SolveReport(orderings=tuple(orderings))
    t0 = time.perf_counter()
    k = 0
    converged = False
    while report.sweeps < max_sweeps:
        order = orderings[k % len(orderings)]
        maxch = _k.sweep_pass(U, dirs, active, labels, f.speed, f.wind, f.cost,
                              lam, h, order, scheme_code, ceiling,
                              use_active_flags)
        report.sweeps += 1
        report.history.append(float(maxch))
        k += 1
        if maxch < tol:
            converged = True
            break
    report.wall_time = time.perf_counter() - t0
    report.final_change = report.history[-1] if report.history else 0.0
    free = labels == FREE
    report.unreachable = int(sum(np.count_nonzero(~np.isfinite(U[i][free]))
                                 for i in range(U.shape[0])))
    if not converged:
        raise ConvergenceError(
            f"no convergence within {max_sweeps} sweeps "
            f"(last change {report.final_change:.3g})"
        )
    return report


def sweep_solve(problem: Problem, scheme: str = "euler", *,
                use_active_flags: bool = True,
                max_sweeps: int = DEFAULT_MAX_SWEEPS,
                orderings=(0, 1, 2, 3)):
    """Solve the coupled system by monotone Gauss-Seidel sweeping.

    Parameters
    ----------
    problem : Problem
    scheme : ``"euler"`` or ``"semilag"``
    use_active_flags : recompute only points whose dependencies changed;
        switching this off changes nothing but the run time.
    max_sweeps : cap before a :class:`ConvergenceError` is raised.
    orderings : rotation of the geometric sweep orders 0..3.

    Returns
    -------
    (ValueField, SolveReport)
    """
    if scheme not in _SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    code = _SCHEMES[scheme]
    if scheme == "semilag":
        require_timestep_validity(problem)
        ceiling = np.inf
    else:
        ceiling = _coupling_ceiling(problem)
    U, dirs, active = _init_state(problem)
    report = _run_sweeps(problem, U, dirs, active, code, ceiling,
                         use_active_flags, max_sweeps, orderings, problem.tol)
    report.scheme = scheme
    return ValueField(values=U, directions=dirs, problem=problem), report


def evaluate_frozen_policy(problem: Problem, policy, rates_real=None) -> ValueField:
    """Expected cost of following a frozen feedback policy.

    Fixing the control to ``policy.directions`` everywhere turns the system
    linear; each equation is the simplex update at the orthant and
    barycentric weights implied by the frozen velocity ``f = speed * a +
    wind``, under switching rates ``rates_real`` (defaulting to the
    problem's own).  The resulting sparse system is solved directly.

    Points whose frozen direction leads into blocked territory, depends with
    positive weight on such a point, or never reaches the target (closed
    recirculation) receive the sentinel: the frozen policy crashes or stalls
    there and its expected cost is infinite.
    """
    from scipy.sparse import csr_matrix, identity
    from scipy.sparse.linalg import spsolve

    prob = problem if rates_real is None else problem.with_rates(rates_real)
    require_timestep_validity(prob)
    fdirs = np.ascontiguousarray(policy.directions, dtype=float)
    if fdirs.shape[0] != prob.mode_count:
        raise ConfigurationError(
            f"policy has {fdirs.shape[0]} modes, problem has {prob.mode_count}"
        )
    n = prob.mode_count
    n1, n2 = prob.grid.shape
    npts = n1 * n2
    nz = n * npts
    h = prob.grid.h
    labels = prob.labels
    lam = prob.rates
    f = prob.fields

    free2 = labels == FREE
    target2 = labels == TARGET
    qflat = np.where(target2, prob.terminal_values, np.inf).ravel()

    a1 = fdirs[..., 0]
    a2 = fdirs[..., 1]
    f1 = f.speed[None] * a1 + f.wind[..., 0]
    f2 = f.speed[None] * a2 + f.wind[..., 1]
    af1 = np.abs(f1)
    af2 = np.abs(f2)
    den = af1 + af2
    directed = np.isfinite(a1) & np.isfinite(a2) & (den > 0.0) & free2[None]
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = np.where(directed, af1 / den, 0.0)      # weight of the axis-0 leg
        tau = np.where(directed, h / den, 0.0)
    Lrow = -np.diag(lam)
    pii = np.maximum(1.0 - Lrow[:, None, None] * tau, 0.0)

    # Flat node ids (mode, ix, iy); columns may point at any mode of a neighbor.
    iz = np.arange(nz).reshape(n, n1, n2)
    ix = np.broadcast_to(np.arange(n1)[None, :, None], (n, n1, n2))
    iy = np.broadcast_to(np.arange(n2)[None, None, :], (n, n1, n2))

    rows = []
    cols = []
    vals = []
    crash = ~directed & free2[None]                  # undirected free points
    const = np.where(directed, tau * f.cost, 0.0)

    for axis in (0, 1):
        fk = f1 if axis == 0 else f2
        w_leg = xi if axis == 0 else 1.0 - xi
        used = directed & (w_leg > 0.0)
        step = np.where(fk > 0.0, 1, -1)
        jx = ix + (step if axis == 0 else 0)
        jy = iy + (step if axis == 1 else 0)
        inside = (jx >= 0) & (jx < n1) & (jy >= 0) & (jy < n2)
        jxc = np.clip(jx, 0, n1 - 1)
        jyc = np.clip(jy, 0, n2 - 1)
        nb_ok = inside & (labels[jxc, jyc] != BLOCKED)
        crash |= used & ~nb_ok
        good = used & nb_ok
        nb_flat = (jxc * n2 + jyc)[good]
        src = iz[good]
        # coefficient toward the same mode at the neighbor
        i_idx = np.broadcast_to(np.arange(n)[:, None, None], (n, n1, n2))[good]
        rows.append(src)
        cols.append(i_idx * npts + nb_flat)
        vals.append((w_leg * pii)[good])
        # coefficients toward the other modes at the neighbor
        for j in range(n):
            coeff = (w_leg * tau) * lam[:, j][:, None, None]
            sel = good & (np.arange(n)[:, None, None] != j) & (lam[:, j][:, None, None] > 0.0)
            if not sel.any():
                continue
            rows.append(iz[sel])
            cols.append(j * npts + ((jxc * n2 + jyc)[sel]))
            vals.append(coeff[sel])

    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    vals = np.concatenate(vals) if vals else np.empty(0)

    free_nodes = np.broadcast_to(free2[None], (n, n1, n2)).ravel()
    target_nodes = np.broadcast_to(target2[None], (n, n1, n2)).ravel()
    q_nodes = np.tile(qflat, n)

    keep_entry = vals > 0.0
    rows, cols, vals = rows[keep_entry], cols[keep_entry], vals[keep_entry]

    inf_nodes = np.zeros(nz, dtype=bool)
    inf_nodes[crash.ravel()] = True
    inf_nodes[~free_nodes & ~target_nodes] = True    # blocked points

    dep = csr_matrix((vals, (rows, cols)), shape=(nz, nz))
    dep_bool = dep.copy()
    dep_bool.data[:] = 1.0

    while True:
        grew = False
        # positive-weight dependency on an infinite node makes a node infinite
        while True:
            spread = (dep_bool @ inf_nodes.astype(float)) > 0.0
            new = spread & free_nodes & ~inf_nodes
            if not new.any():
                break
            inf_nodes |= new
            grew = True
        # nodes that cannot reach the target through live dependencies stall
        live = free_nodes & ~inf_nodes
        reach = np.zeros(nz, dtype=bool)
        frontier = target_nodes.astype(float)
        while True:
            hits = (dep_bool @ frontier) > 0.0
            new = hits & live & ~reach
            if not new.any():
                break
            reach |= new
            frontier = new.astype(float)
        stalled = live & ~reach
        if stalled.any():
            inf_nodes |= stalled
            grew = True
        if not grew:
            break

    kept = free_nodes & ~inf_nodes
    values = np.full(nz, np.inf)
    values[target_nodes] = q_nodes[target_nodes]
    if kept.any():
        b = const.ravel().copy()
        onto_target = target_nodes[cols]
        if onto_target.any():
            np.add.at(b, rows[onto_target], vals[onto_target] * q_nodes[cols[onto_target]])
        in_kept = kept[rows] & kept[cols]
        kid = np.cumsum(kept) - 1                    # kept-node reindexing
        nk = int(kept.sum())
        A = csr_matrix((vals[in_kept], (kid[rows[in_kept]], kid[cols[in_kept]])),
                       shape=(nk, nk))
        sol = spsolve((identity(nk, format="csr") - A).tocsr(), b[kept])
        values[kept] = sol
    return ValueField(values=values.reshape(n, n1, n2),
                      directions=fdirs.copy(), problem=prob)
