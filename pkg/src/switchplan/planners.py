"""Planning variants and feedback-policy extraction.

Three planners over the same problem instance:

* coupled  -- the switching rates as given;
* uncoupled -- rates forced to zero, one independent solve per mode;
* infinite-rate -- a single averaged mode weighted by the invariant
  distribution of the chain (the planner of a controller that does not track
  the current mode).

A :class:`Policy` stores the unit control direction of the winning update at
every gridpoint/mode of a converged field.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import ConfigurationError
from .markov import invariant_distribution
from .model import Dynamics, Problem
from .sweep import SolveReport, ValueField, sweep_solve

COUPLED = "coupled"
UNCOUPLED = "uncoupled"
INFINITE_RATE = "infinite-rate"


@dataclass(eq=False)
class Policy:
    """Per-(gridpoint, mode) unit control directions with provenance."""

    directions: np.ndarray  # (n_modes, n1, n2, 2), NaN where undefined
    source: str
    provenance: np.ndarray | None = None  # per-point update provenance codes

    @property
    def mode_count(self) -> int:
        return self.directions.shape[0]

    def undirected_mask(self) -> np.ndarray:
        return ~np.isfinite(self.directions[..., 0])

    def expand(self, n: int) -> "Policy":
        """Replicate a mode-independent policy across ``n`` modes."""
        if self.mode_count == n:
            return self
        if self.mode_count != 1:
            raise ConfigurationError("can only expand a single-mode policy")
        dirs = np.repeat(self.directions, n, axis=0).copy()
        prov = None if self.provenance is None else np.repeat(self.provenance, n, axis=0).copy()
        return Policy(directions=dirs, source=self.source, provenance=prov)


def expand_field(field: ValueField, n: int) -> ValueField:
    """Replicate a single-mode value field across ``n`` modes."""
    if field.mode_count == n:
        return field
    if field.mode_count != 1:
        raise ConfigurationError("can only expand a single-mode field")
    return ValueField(values=np.repeat(field.values, n, axis=0).copy(),
                      directions=np.repeat(field.directions, n, axis=0).copy(),
                      problem=field.problem)


def solve_coupled(problem: Problem, scheme: str = "euler", **kw):
    """Solve the weakly-coupled system under the problem's own rates."""
    return sweep_solve(problem, scheme=scheme, **kw)


def _single_mode_problem(problem: Problem, i: int) -> Problem:
    d = problem.dynamics
    dyn = Dynamics(
        mode_count=1,
        speed=d.speed,
        winds=(d.winds[i],),
        running_cost=lambda x, _j, i=i: d.running_cost(x, i),
        cost_bound=d.cost_bound,
    )
    return Problem.build(problem.grid, problem.region, dyn, np.zeros((1, 1)),
                         problem.terminal_cost, problem.tol)


def solve_uncoupled(problem: Problem, scheme: str = "euler", **kw) -> ValueField:
    """One independent single-mode solve per mode (rates forced to zero).

    Equals ``solve_coupled`` on the zero-rate problem bit for bit under the
    same sweep schedule.
    """
    n = problem.mode_count
    parts = [sweep_solve(_single_mode_problem(problem, i), scheme=scheme, **kw)[0]
             for i in range(n)]
    values = np.concatenate([p.values for p in parts], axis=0)
    dirs = np.concatenate([p.directions for p in parts], axis=0)
    return ValueField(values=values, directions=dirs, problem=problem)


def averaged_problem(problem: Problem) -> Problem:
    """Single-mode problem with drift and cost averaged by the invariant
    distribution of the mode chain."""
    pi = invariant_distribution(problem.rates)
    d = problem.dynamics
    winds = d.winds

    def avg_wind(x, pi=pi, winds=winds):
        acc = pi[0] * np.asarray(winds[0](x), dtype=float)
        for k in range(1, len(winds)):
            acc = acc + pi[k] * np.asarray(winds[k](x), dtype=float)
        return acc

    def avg_cost(x, _j, pi=pi, cost=d.running_cost):
        return float(sum(pi[k] * cost(x, k) for k in range(len(pi))))

    dyn = Dynamics(mode_count=1, speed=d.speed, winds=(avg_wind,),
                   running_cost=avg_cost, cost_bound=d.cost_bound)
    return Problem.build(problem.grid, problem.region, dyn, np.zeros((1, 1)),
                         problem.terminal_cost, problem.tol)


def solve_infinite_rate(problem: Problem, scheme: str = "euler", **kw) -> ValueField:
    """Value function of the infinite-switching-rate limit (single mode)."""
    field, _ = sweep_solve(averaged_problem(problem), scheme=scheme, **kw)
    return field


def extract_policy(field: ValueField, problem: Problem | None = None,
                   scheme: str = "euler", source: str = COUPLED) -> Policy:
    """Feedback policy from a converged field.

    Runs one extra recomputation pass with no value changes accepted and
    stores the direction of the winning update at every free point; target
    and blocked points carry no direction.
    """
    prob = problem if problem is not None else field.problem
    if field.mode_count != prob.mode_count:
        raise ConfigurationError("field/problem mode count mismatch")
    n, n1, n2 = field.values.shape
    dirs = np.full((n, n1, n2, 2), np.nan)
    prov = np.full((n, n1, n2), _k.PROV_NONE, dtype=np.int8)
    f = prob.fields
    scheme_code = 0 if scheme == "euler" else 1
    from .sweep import _coupling_ceiling
    ceiling = _coupling_ceiling(prob) if scheme_code == 0 else np.inf
    _k.direction_pass(field.values, prob.labels, f.speed, f.wind, f.cost,
                      prob.rates, prob.grid.h, scheme_code, ceiling, dirs, prov)
    return Policy(directions=dirs, source=source, provenance=prov)


def make_policy(problem: Problem, planner: str, scheme: str = "euler"):
    """Convenience: solve with the requested planner and extract its policy.

    Returns ``(field, policy)`` where both are expanded to the problem's mode
    count (the infinite-rate planner is mode-independent by construction).
    """
    if planner == COUPLED:
        field, _ = solve_coupled(problem, scheme=scheme)
        return field, extract_policy(field, problem, scheme, source=COUPLED)
    if planner == UNCOUPLED:
        field = solve_uncoupled(problem, scheme=scheme)
        zero = problem.with_rates(np.zeros_like(problem.rates))
        return field, extract_policy(field, zero, scheme, source=UNCOUPLED)
    if planner == INFINITE_RATE:
        avg = averaged_problem(problem)
        field1, _ = sweep_solve(avg, scheme=scheme)
        pol1 = extract_policy(field1, avg, scheme, source=INFINITE_RATE)
        n = problem.mode_count
        return expand_field(ValueField(field1.values, field1.directions, problem),
                            n), pol1.expand(n)
    raise ConfigurationError(f"unknown planner {planner!r}")
