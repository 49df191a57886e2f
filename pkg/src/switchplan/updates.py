"""Single-gridpoint update operators.

Two families of first-order monotone updates over a value array
``U[(mode, ix, iy)]``:

* the semi-Lagrangian update with a control-dependent pseudo-timestep,
  minimized orthant by orthant over the barycentric weights of the
  neighboring simplex;
* the Eulerian update that solves a per-quadrant quadratic for the value,
  keeps the larger root under an upwinding check on the recovered velocity,
  and falls back to one-sided axis updates when the quadratic is rejected.

All operators propagate the ``+inf`` sentinel: any required input that is
unreached (or blocked) makes the candidate unreached.  Gridpoints are
addressed as ``z = ((ix, iy), mode)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import ConfigurationError
from .model import Problem

#: Fixed orthant enumeration order (ties keep the earliest).
ORTHANTS_2D = ((1, 1), (1, -1), (-1, 1), (-1, -1))

TWO_SIDED = "two-sided"
ONE_SIDED = "one-sided"
SIMPLEX = "simplex"

_PROV_NAMES = {_k.PROV_TWO_SIDED: TWO_SIDED, _k.PROV_ONE_SIDED: ONE_SIDED,
               _k.PROV_SIMPLEX: SIMPLEX}


@dataclass(frozen=True)
class UpdateResult:
    """Candidate value, minimizing control direction and provenance."""

    value: float
    direction: np.ndarray | None
    provenance: str | None


def orthants(d: int):
    """All 2^d sign vectors, in the fixed enumeration order."""
    if d == 2:
        return ORTHANTS_2D
    out = [()]
    for _ in range(d):
        out = [o + (e,) for o in out for e in (1, -1)]
    return tuple(out)


def max_switch_rate(problem: Problem) -> float:
    return float(max(-np.diag(problem.rates)))


def require_timestep_validity(problem: Problem) -> None:
    """Reject configurations whose grid is too coarse for the switching rates.

    The first-order switch probabilities p_ii(tau) = 1 - tau * sum_j lam_ij
    stay non-negative only when h < (speed - ||wind||) / sum_j lam_ij; a
    violation would break the monotonicity of the simplex update.
    """
    lmax = max_switch_rate(problem)
    if lmax <= 0.0:
        return
    bound = problem.min_margin / lmax
    if problem.grid.h >= bound:
        raise ConfigurationError(
            f"grid spacing h={problem.grid.h:.3g} too large for the switching rates; "
            f"the simplex update needs h < {bound:.3g}"
        )


def _unpack(z):
    (ix, iy), i = z
    return int(ix), int(iy), int(i)


def _point_data(problem, i, ix, iy):
    f = problem.fields
    return (f.speed[ix, iy], f.wind[i, ix, iy, 0], f.wind[i, ix, iy, 1],
            f.cost[i, ix, iy])


def _coupling(problem, U, i, ix, iy):
    lam = problem.rates
    L = 0.0
    S = 0.0
    for j in range(problem.mode_count):
        if j == i:
            continue
        lij = lam[i, j]
        if lij > 0.0:
            L += lij
            S += lij * U[j, ix, iy]
    return L, S


def simplex_value(z, ort, xi, U, problem: Problem) -> float:
    """Value of the simplex update at fixed orthant and barycentric weights.

    ``xi = (xi1, xi2)`` must lie in the unit simplex.  The candidate is the
    pseudo-timestep stage cost plus the switch-probability-weighted values at
    the orthant neighbors; a sentinel at any neighbor with positive weight
    gives a sentinel.
    """
    ix, iy, i = _unpack(z)
    xi1, xi2 = float(xi[0]), float(xi[1])
    if xi1 < -1e-12 or xi2 < -1e-12 or abs(xi1 + xi2 - 1.0) > 1e-9:
        raise ConfigurationError(f"barycentric weights {xi} not in the unit simplex")
    require_timestep_validity(problem)
    e1, e2 = int(ort[0]), int(ort[1])
    labels = problem.labels
    lam = problem.rates
    n1, n2 = problem.grid.shape
    u1, S1 = _k._neighbor_mode_data(U, labels, lam, i, ix + e1, iy, 0 <= ix + e1 < n1)
    u2, S2 = _k._neighbor_mode_data(U, labels, lam, i, ix, iy + e2, 0 <= iy + e2 < n2)
    L, _ = _coupling(problem, U, i, ix, iy)
    s, w1, w2, C = _point_data(problem, i, ix, iy)
    return float(_k.simplex_candidate(xi1, e1, e2, u1, S1, u2, S2, L, s, w1, w2,
                                      C, problem.grid.h))


def semilag_update(z, U, problem: Problem) -> UpdateResult:
    """Semi-Lagrangian update: minimum over all orthants and simplex weights."""
    ix, iy, i = _unpack(z)
    require_timestep_validity(problem)
    f = problem.fields
    val, a1, a2 = _k.semilag_point(U, problem.labels, f.speed, f.wind, f.cost,
                                   problem.rates, i, ix, iy, problem.grid.h)
    if not np.isfinite(val):
        return UpdateResult(np.inf, None, None)
    return UpdateResult(float(val), np.array([a1, a2]), SIMPLEX)


def quadratic_two_sided(z, ort, U, problem: Problem):
    """Per-quadrant quadratic update; ``None`` when rejected.

    Rejection covers missing/sentinel inputs, complex roots, a degenerate
    discrete gradient, and failure of the upwinding condition on the larger
    root.
    """
    ix, iy, i = _unpack(z)
    e1, e2 = int(ort[0]), int(ort[1])
    labels = problem.labels
    n1, n2 = problem.grid.shape
    jx, jy = ix + e1, iy + e2
    b1 = U[i, jx, iy] if 0 <= jx < n1 and labels[jx, iy] != _k.BLK else np.inf
    b2 = U[i, ix, jy] if 0 <= jy < n2 and labels[ix, jy] != _k.BLK else np.inf
    L, S = _coupling(problem, U, i, ix, iy)
    s, w1, w2, C = _point_data(problem, i, ix, iy)
    val, _, _ = _k.two_sided_value(b1, b2, e1, e2, w1, w2, s, C, L, S,
                                   problem.grid.h)
    return float(val) if np.isfinite(val) else None


def one_sided_update(z, axis: int, sign: int, U, problem: Problem) -> float:
    """One-sided update along ``sign * e_axis``; sentinel inputs give sentinel."""
    ix, iy, i = _unpack(z)
    if axis not in (0, 1) or sign not in (-1, 1):
        raise ConfigurationError(f"invalid axis/sign ({axis}, {sign})")
    labels = problem.labels
    n1, n2 = problem.grid.shape
    if axis == 0:
        jx, jy = ix + sign, iy
    else:
        jx, jy = ix, iy + sign
    b = U[i, jx, jy] if 0 <= jx < n1 and 0 <= jy < n2 and labels[jx, jy] != _k.BLK \
        else np.inf
    L, S = _coupling(problem, U, i, ix, iy)
    s, w1, w2, C = _point_data(problem, i, ix, iy)
    wk = w1 if axis == 0 else w2
    return float(_k.one_sided_value(b, sign, wk, w1, w2, s, C, L, S,
                                    problem.grid.h))


def euler_update(z, U, problem: Problem, coupling_ceiling: float = np.inf) -> UpdateResult:
    """Eulerian update: per orthant the quadratic when accepted, else the best
    one-sided candidate; overall minimum over orthants.

    ``coupling_ceiling`` caps sentinel cross-mode values in the coupling sum;
    the default ``inf`` keeps strict sentinel propagation (the sweep solver
    passes a finite ceiling so coupled systems can bootstrap from the
    all-unreached start).
    """
    ix, iy, i = _unpack(z)
    f = problem.fields
    val, a1, a2, prov = _k.euler_point(U, problem.labels, f.speed, f.wind, f.cost,
                                       problem.rates, i, ix, iy, problem.grid.h,
                                       coupling_ceiling)
    if not np.isfinite(val):
        return UpdateResult(np.inf, None, None)
    return UpdateResult(float(val), np.array([a1, a2]), _PROV_NAMES[prov])
