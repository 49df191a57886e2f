"""Ring-of-modes discretization of a diffusing wind direction.

The wind angle performs a Brownian motion with volatility ``sigma``;
discretizing the circle into ``n`` equal angles turns the problem into a
random-switching instance whose chain hops between adjacent angles at rate
``sigma^2 n^2 / (8 pi^2)``.  The construction reuses the generic problem
machinery, so every solver and simulator applies unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import Dynamics, Grid, Problem, Rect, Region


@dataclass(frozen=True)
class RingSpec:
    """Parameters of the angular discretization.

    ``geometry`` defaults to the two-wind benchmark harbor when omitted.
    """

    mode_count: int = 8
    sigma: float = 2.0
    wind_speed: float = 1.5
    rowing_speed: float = 2.0
    h: float = 1.0 / 320
    region: Region | None = None
    tol: float = 1e-6

    def __post_init__(self):
        if self.mode_count < 3:
            raise ConfigurationError("a ring needs at least 3 modes")
        if self.sigma <= 0:
            raise ConfigurationError("sigma must be positive")
        if self.rowing_speed <= self.wind_speed:
            raise ConfigurationError("rowing speed must exceed the wind speed")


def adjacent_rate(sigma: float, n: int) -> float:
    """Switching rate to each neighboring angle: sigma^2 n^2 / (8 pi^2)."""
    return sigma * sigma * n * n / (8.0 * np.pi ** 2)


def ring_rate_matrix(sigma: float, n: int) -> np.ndarray:
    """Generator of the nearest-neighbor walk on n angles (periodic)."""
    rate = adjacent_rate(sigma, n)
    lam = np.zeros((n, n))
    for i in range(n):
        lam[i, (i + 1) % n] = rate
        lam[i, (i - 1) % n] = rate
        lam[i, i] = -2.0 * rate
    return lam


def build_ring_problem(spec: RingSpec) -> Problem:
    """Standard Problem with winds at angles 2*pi*i/n and the ring generator."""
    n = spec.mode_count
    thetas = 2.0 * np.pi * np.arange(n) / n
    winds = [(spec.wind_speed * np.cos(th), spec.wind_speed * np.sin(th))
             for th in thetas]
    dyn = Dynamics.constant(spec.rowing_speed, winds)
    region = spec.region
    if region is None:
        region = Region(
            box=Rect((0.0, 0.0), (1.0, 1.0)),
            obstacles=(Rect((0.1, 0.1), (0.85, 0.15)),),
            target_points=((0.5, 0.05),),
        )
    lo, hi = region.box.lo, region.box.hi
    grid = Grid.from_bounds(lo, hi, spec.h)
    return Problem.build(grid, region, dyn, ring_rate_matrix(spec.sigma, n),
                         terminal_cost=0.0, tol=spec.tol)


def mode_angles(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def theta_variability_bound(sigma: float, theta1: float, theta2: float) -> float:
    """Upper bound on the value gap between wind angles theta1 and theta2.

    Equals the larger expected angular hitting time scaled for unit running
    cost: phi(a) = a (2 pi - a) / sigma^2 with a the wrapped angle difference;
    the global maximum pi^2 / sigma^2 sits at a = pi.
    """
    if sigma <= 0:
        raise ConfigurationError("sigma must be positive")
    a = float(np.mod(abs(theta2 - theta1), 2.0 * np.pi))
    return a * (2.0 * np.pi - a) / (sigma * sigma)
