"""Problem geometry and dynamics: grid, obstacles, target, drift fields.

A :class:`Problem` bundles everything a solver needs: a uniform Cartesian
:class:`Grid`, a :class:`Region` (domain box, axis-aligned rectangular
obstacles, target), mode-dependent :class:`Dynamics`, a validated rate
matrix and the terminal cost on the target.  Gridpoints are classified once
into FREE / TARGET / BLOCKED labels; blocked points (obstacle points and
non-target outer-boundary points) hold the "unreached" sentinel ``+inf``
and are never updated by the solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError
from .markov import validate_rates

# Gridpoint labels.
FREE = 0
TARGET = 1
BLOCKED = 2

#: Sentinel for "unreached / prohibited": excluded from convergence
#: measurement and from interpolation.
UNREACHED = np.inf

_GEOM_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian grid over an axis-aligned box.

    The spacing ``h`` is shared by all axes and every extent must be an
    integer multiple of ``h``, so that the point count along axis ``k`` is
    ``round((hi[k] - lo[k]) / h) + 1``.
    """

    lo: tuple
    hi: tuple
    h: float
    shape: tuple

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float], h: float) -> "Grid":
        lo = tuple(float(v) for v in lo)
        hi = tuple(float(v) for v in hi)
        if len(lo) != len(hi) or not lo:
            raise ConfigurationError("lo and hi must be non-empty and of equal length")
        if h <= 0:
            raise ConfigurationError(f"grid spacing must be positive, got {h}")
        shape = []
        for a, b in zip(lo, hi):
            if b <= a:
                raise ConfigurationError(f"empty extent [{a}, {b}]")
            steps = (b - a) / h
            n = round(steps)
            if n < 1 or abs(steps - n) > 1e-6 * max(1.0, n):
                raise ConfigurationError(
                    f"extent [{a}, {b}] is not an integer multiple of h={h}"
                )
            shape.append(n + 1)
        return cls(lo, hi, float(h), tuple(shape))

    @property
    def dimension(self) -> int:
        return len(self.shape)

    @property
    def num_points(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, k: int) -> np.ndarray:
        return self.lo[k] + self.h * np.arange(self.shape[k])

    def coordinate(self, idx) -> np.ndarray:
        """Coordinates of the gridpoint with multi-index ``idx``."""
        return np.array([self.lo[k] + idx[k] * self.h for k in range(self.dimension)])

    def snap(self, point) -> tuple:
        """Multi-index of the nearest gridpoint; ties break toward the lower index."""
        idx = []
        for k, v in enumerate(point):
            r = (float(v) - self.lo[k]) / self.h
            i = int(np.ceil(r - 0.5))
            idx.append(min(max(i, 0), self.shape[k] - 1))
        return tuple(idx)

    def contains(self, point) -> bool:
        return all(
            self.lo[k] - _GEOM_TOL <= point[k] <= self.hi[k] + _GEOM_TOL
            for k in range(self.dimension)
        )


def neighbors(grid: Grid, idx) -> list:
    """All gridpoints at Euclidean distance exactly ``h`` from ``idx``.

    Interior points have ``2 d`` neighbors, boundary points fewer.  The order
    is fixed: for each axis, the lower neighbor then the upper one.
    """
    idx = tuple(int(v) for v in idx)
    if len(idx) != grid.dimension:
        raise ConfigurationError(f"index {idx} has wrong dimension for grid")
    for k, i in enumerate(idx):
        if not 0 <= i < grid.shape[k]:
            raise ConfigurationError(f"index {idx} outside grid of shape {grid.shape}")
    out = []
    for k in range(grid.dimension):
        for step in (-1, +1):
            j = idx[k] + step
            if 0 <= j < grid.shape[k]:
                out.append(idx[:k] + (j,) + idx[k + 1 :])
    return out


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle ``[lo, hi]``."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi):
            raise ConfigurationError("rectangle lo/hi dimension mismatch")
        if any(b < a for a, b in zip(lo, hi)):
            raise ConfigurationError(f"degenerate rectangle lo={lo}, hi={hi}")

    def contains(self, point, tol: float = _GEOM_TOL) -> bool:
        """Closed membership (the boundary counts)."""
        return all(
            self.lo[k] - tol <= point[k] <= self.hi[k] + tol for k in range(len(self.lo))
        )

    def contains_interior(self, point, tol: float = _GEOM_TOL) -> bool:
        return all(
            self.lo[k] + tol < point[k] < self.hi[k] - tol for k in range(len(self.lo))
        )

    def inside(self, other: "Rect") -> bool:
        return all(
            other.lo[k] - _GEOM_TOL <= self.lo[k] and self.hi[k] <= other.hi[k] + _GEOM_TOL
            for k in range(len(self.lo))
        )

    def as_array(self) -> np.ndarray:
        return np.array([*self.lo, *self.hi])


@dataclass(frozen=True)
class Region:
    """Domain box, obstacles and target of a planning problem.

    The target is a union of isolated points and/or rectangles.  Obstacles
    use closed membership (a gridpoint on the obstacle boundary counts as
    blocked) so that trajectories cannot graze through an edge at grid
    resolution.
    """

    box: Rect
    obstacles: tuple = ()
    target_points: tuple = ()
    target_rects: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(
            self,
            "target_points",
            tuple(tuple(float(v) for v in p) for p in self.target_points),
        )
        object.__setattr__(self, "target_rects", tuple(self.target_rects))
        if not self.target_points and not self.target_rects:
            raise ConfigurationError("empty target")
        for r in self.obstacles:
            if not r.inside(self.box):
                raise ConfigurationError(f"obstacle {r} extends outside the domain box")
        for p in self.target_points:
            for r in self.obstacles:
                if r.contains_interior(p):
                    raise ConfigurationError(f"target point {p} lies inside obstacle {r}")
        for t in self.target_rects:
            for r in self.obstacles:
                overlap_lo = [max(a, b) for a, b in zip(t.lo, r.lo)]
                overlap_hi = [min(a, b) for a, b in zip(t.hi, r.hi)]
                if all(a + _GEOM_TOL < b for a, b in zip(overlap_lo, overlap_hi)):
                    raise ConfigurationError(f"target {t} intersects obstacle interior {r}")


@dataclass(frozen=True)
class Dynamics:
    """Mode-dependent velocity field ``f_i(x, a) = speed(x) * a + winds[i](x)``.

    ``speed`` and each ``winds[i]`` are callables of the position; they may
    accept a stacked coordinate array for vectorized evaluation or return a
    constant.  ``running_cost(x, i)`` is the cost accrued per unit time
    (constant 1 for time-optimal planning) and must stay positive and below
    ``cost_bound``.  The control set is the unit circle: controls are unit
    vectors, and small-time controllability requires ``speed > ||wind||``
    everywhere in every mode.
    """

    mode_count: int
    speed: Callable
    winds: tuple
    running_cost: Callable = None
    cost_bound: float = 1.0
    control_set: str = "unit-circle"

    def __post_init__(self):
        object.__setattr__(self, "winds", tuple(self.winds))
        if self.mode_count != len(self.winds) or self.mode_count < 1:
            raise ConfigurationError(
                f"mode_count={self.mode_count} does not match {len(self.winds)} wind fields"
            )
        if self.control_set != "unit-circle":
            raise ConfigurationError(f"unsupported control set {self.control_set!r}")
        if self.running_cost is None:
            object.__setattr__(self, "running_cost", lambda x, i: 1.0)

    @classmethod
    def constant(cls, speed: float, winds, cost: float = 1.0) -> "Dynamics":
        """Spatially constant speed/wind/cost (the benchmark setting)."""
        winds = [np.asarray(w, dtype=float) for w in winds]
        return cls(
            mode_count=len(winds),
            speed=lambda x, s=float(speed): s,
            winds=tuple((lambda x, w=w: w) for w in winds),
            running_cost=lambda x, i, c=float(cost): c,
            cost_bound=float(cost),
        )


@dataclass(frozen=True, eq=False)
class GridFields:
    """Dynamics sampled on the grid: arrays consumed by the solver kernels."""

    speed: np.ndarray  # (n1, n2)
    wind: np.ndarray   # (n_modes, n1, n2, 2)
    cost: np.ndarray   # (n_modes, n1, n2)


def _sample_scalar_field(fn, coords, shape) -> np.ndarray:
    """Evaluate a callable on every gridpoint, vectorized when possible."""
    try:
        out = np.asarray(fn(coords), dtype=float)
        return np.ascontiguousarray(np.broadcast_to(out, shape)).copy()
    except Exception:
        pass
    out = np.empty(shape)
    it = np.ndindex(*shape)
    for idx in it:
        out[idx] = fn(coords[idx])
    return out


def _sample_vector_field(fn, coords, shape) -> np.ndarray:
    try:
        out = np.asarray(fn(coords), dtype=float)
        return np.ascontiguousarray(np.broadcast_to(out, shape + (2,))).copy()
    except Exception:
        pass
    out = np.empty(shape + (2,))
    for idx in np.ndindex(*shape):
        out[idx] = np.asarray(fn(coords[idx]), dtype=float)
    return out


@dataclass(frozen=True, eq=False)
class Problem:
    """A full planning instance.

    Use :meth:`Problem.build` to construct one; it validates the rate matrix,
    classifies the gridpoints and checks the controllability and cost bounds
    on the grid.
    """

    grid: Grid
    region: Region
    dynamics: Dynamics
    rates: np.ndarray
    terminal_cost: object = 0.0
    tol: float = 1e-6

    @classmethod
    def build(cls, grid, region, dynamics, rates, terminal_cost=0.0, tol=1e-6) -> "Problem":
        lam = validate_rates(rates)
        if lam.shape[0] != dynamics.mode_count:
            raise ConfigurationError(
                f"rate matrix has {lam.shape[0]} modes, dynamics has {dynamics.mode_count}"
            )
        if grid.dimension != 2:
            raise ConfigurationError("solvers support 2-D grids only")
        prob = cls(grid, region, dynamics, lam, terminal_cost, float(tol))
        prob.labels        # classify eagerly so geometry errors surface here
        prob.fields        # and dynamics bounds too
        return prob

    @property
    def mode_count(self) -> int:
        return self.dynamics.mode_count

    @cached_property
    def coords(self) -> np.ndarray:
        """Stacked gridpoint coordinates, shape ``(n1, n2, 2)``."""
        x = self.grid.axis_coords(0)
        y = self.grid.axis_coords(1)
        return np.stack(np.meshgrid(x, y, indexing="ij"), axis=-1)

    @cached_property
    def labels(self) -> np.ndarray:
        return classify_gridpoints(self)

    @cached_property
    def terminal_values(self) -> np.ndarray:
        """Terminal cost ``q`` on TARGET points, sentinel elsewhere."""
        q = np.full(self.grid.shape, UNREACHED)
        tmask = self.labels == TARGET
        if callable(self.terminal_cost):
            for idx in zip(*np.nonzero(tmask)):
                q[idx] = float(self.terminal_cost(self.grid.coordinate(idx)))
        else:
            q[tmask] = float(self.terminal_cost)
        if not np.all(np.isfinite(q[tmask])):
            raise ConfigurationError("terminal cost must be finite on the target")
        return q

    @cached_property
    def fields(self) -> GridFields:
        n = self.mode_count
        shape = self.grid.shape
        speed = _sample_scalar_field(self.dynamics.speed, self.coords, shape)
        wind = np.empty((n,) + shape + (2,))
        cost = np.empty((n,) + shape)
        for i in range(n):
            wind[i] = _sample_vector_field(self.dynamics.winds[i], self.coords, shape)
            cost[i] = _sample_scalar_field(
                lambda x, i=i: self.dynamics.running_cost(x, i), self.coords, shape
            )
        wnorm = np.linalg.norm(wind, axis=-1)
        gap = speed[None, :, :] - wnorm
        if np.any(gap <= 0.0):
            raise ConfigurationError(
                "speed must exceed the wind magnitude everywhere "
                f"(worst margin {gap.min():.3g})"
            )
        if np.any(cost <= 0.0):
            raise ConfigurationError("running cost must be positive")
        if np.any(cost > self.dynamics.cost_bound * (1 + 1e-12)):
            raise ConfigurationError("running cost exceeds the declared cost bound")
        return GridFields(speed=speed, wind=wind, cost=cost)

    @cached_property
    def min_margin(self) -> float:
        """Smallest ``speed - ||wind||`` over the grid (worst characteristic speed)."""
        wnorm = np.linalg.norm(self.fields.wind, axis=-1)
        return float((self.fields.speed[None, :, :] - wnorm).min())

    def with_rates(self, rates) -> "Problem":
        """Same instance under a different rate matrix."""
        return Problem.build(
            self.grid, self.region, self.dynamics, rates, self.terminal_cost, self.tol
        )

    def target_indices(self) -> list:
        return list(zip(*np.nonzero(self.labels == TARGET)))


def classify_gridpoints(problem: Problem) -> np.ndarray:
    """Label every gridpoint as FREE, TARGET or BLOCKED.

    Obstacle points (closed membership) and non-target outer-boundary points
    are BLOCKED; point targets snap to the nearest gridpoint.  A target that
    snaps into an obstacle is a configuration error, as is an empty target.
    """
    grid, region = problem.grid, problem.region
    if grid.dimension != 2:
        raise ConfigurationError("classification supports 2-D grids only")
    n1, n2 = grid.shape
    xs = grid.axis_coords(0)[:, None]
    ys = grid.axis_coords(1)[None, :]
    obstacle = np.zeros((n1, n2), dtype=bool)
    for r in region.obstacles:
        obstacle |= (
            (xs >= r.lo[0] - _GEOM_TOL)
            & (xs <= r.hi[0] + _GEOM_TOL)
            & (ys >= r.lo[1] - _GEOM_TOL)
            & (ys <= r.hi[1] + _GEOM_TOL)
        )
    labels = np.full((n1, n2), FREE, dtype=np.int8)
    labels[obstacle] = BLOCKED
    labels[0, :] = labels[-1, :] = BLOCKED
    labels[:, 0] = labels[:, -1] = BLOCKED

    target_idx = []
    for p in region.target_points:
        if not grid.contains(p):
            raise ConfigurationError(f"target point {p} outside the grid")
        target_idx.append(grid.snap(p))
    for t in region.target_rects:
        inside = (
            (xs >= t.lo[0] - _GEOM_TOL)
            & (xs <= t.hi[0] + _GEOM_TOL)
            & (ys >= t.lo[1] - _GEOM_TOL)
            & (ys <= t.hi[1] + _GEOM_TOL)
        )
        target_idx.extend(zip(*np.nonzero(inside)))
    if not target_idx:
        raise ConfigurationError("target set contains no gridpoint")
    for idx in target_idx:
        if obstacle[idx]:
            raise ConfigurationError(
                f"target gridpoint {tuple(int(v) for v in idx)} falls inside an obstacle"
            )
        labels[idx] = TARGET
    return labels
