"""Ready-made problem instances used by the tests, demos and CLI."""

from __future__ import annotations

import numpy as np

from .model import Dynamics, Grid, Problem, Rect, Region


def two_wind_problem(lam: float = 1.0, h: float = 1.0 / 320,
                     wind_speed: float = 1.5, rowing_speed: float = 2.0,
                     tol: float = 1e-6) -> Problem:
    """Square harbor with one rectangular obstacle and two opposite winds.

    Mode 0 blows east (+x), mode 1 west; switching is symmetric at rate
    ``lam``.  The target is the single point (0.5, 0.05) just south of the
    obstacle and the boundary is prohibitive elsewhere.
    """
    grid = Grid.from_bounds((0.0, 0.0), (1.0, 1.0), h)
    region = Region(
        box=Rect((0.0, 0.0), (1.0, 1.0)),
        obstacles=(Rect((0.1, 0.1), (0.85, 0.15)),),
        target_points=((0.5, 0.05),),
    )
    dyn = Dynamics.constant(rowing_speed,
                            [(wind_speed, 0.0), (-wind_speed, 0.0)])
    rates = np.array([[-lam, lam], [lam, -lam]], dtype=float)
    return Problem.build(grid, region, dyn, rates, terminal_cost=0.0, tol=tol)


def open_water_problem(lam: float = 0.0, h: float = 1.0 / 80,
                       wind_speed: float = 1.5, rowing_speed: float = 2.0,
                       target=(0.5, 0.05), tol: float = 1e-6) -> Problem:
    """The two-wind setting without the obstacle."""
    grid = Grid.from_bounds((0.0, 0.0), (1.0, 1.0), h)
    region = Region(box=Rect((0.0, 0.0), (1.0, 1.0)), target_points=(tuple(target),))
    dyn = Dynamics.constant(rowing_speed,
                            [(wind_speed, 0.0), (-wind_speed, 0.0)])
    rates = np.array([[-lam, lam], [lam, -lam]], dtype=float)
    return Problem.build(grid, region, dyn, rates, terminal_cost=0.0, tol=tol)


def eikonal_problem(h: float = 1.0 / 40, speed: float = 1.0,
                    target=(0.5, 0.5), extent=((0.0, 0.0), (1.0, 1.0)),
                    tol: float = 1e-6) -> Problem:
    """Single mode, no wind: the value function is distance / speed."""
    lo, hi = extent
    grid = Grid.from_bounds(lo, hi, h)
    region = Region(box=Rect(lo, hi), target_points=(tuple(target),))
    dyn = Dynamics.constant(speed, [(0.0, 0.0)])
    return Problem.build(grid, region, dyn, np.zeros((1, 1)), 0.0, tol)
