"""Continuous-time Markov chain utilities for the mode-switching process.

A rate matrix ``lam`` holds the switching rates of the environment: the
off-diagonal entry ``lam[i, j]`` is the rate of switching from mode ``i`` to
mode ``j`` and each diagonal entry equals minus the sum of the rest of its
row, so rows sum to zero.  All functions here are pure; sampling takes an
externally supplied ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm, null_space

from .errors import IrreducibilityError, RateMatrixError, UnreachableModeError


def validate_rates(rates) -> np.ndarray:
    """Return a float copy of ``rates`` with the diagonal recomputed.

    Off-diagonal entries must be non-negative switching rates; the diagonal
    is overwritten with minus the off-diagonal row sums so that rows sum to
    zero exactly.

    Raises
    ------
    RateMatrixError
        If the matrix is not square or has a negative off-diagonal entry.
    """
    lam = np.array(rates, dtype=float)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        raise RateMatrixError(f"rate matrix must be square, got shape {lam.shape}")
    np.fill_diagonal(lam, 0.0)
    if np.any(lam < 0.0):
        raise RateMatrixError("off-diagonal switching rates must be non-negative")
    np.fill_diagonal(lam, -lam.sum(axis=1))
    return lam


def transition_probabilities(rates, t: float) -> np.ndarray:
    """Probability matrix ``P(t) = exp(lam * t)`` of the mode chain.

    Uses scaling-and-squaring with Pade approximation (``scipy.linalg.expm``).
    Rows of the result sum to one.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    lam = validate_rates(rates)
    return expm(lam * t)


def _reachability(lam: np.ndarray) -> np.ndarray:
    """Boolean closure of the directed off-diagonal support graph."""
    n = lam.shape[0]
    reach = (lam > 0.0) | np.eye(n, dtype=bool)
    for _ in range(n):
        nxt = reach | (reach @ reach)
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return reach


def is_irreducible(rates) -> bool:
    """True when every mode is reachable from every other mode."""
    return bool(_reachability(validate_rates(rates)).all())


def invariant_distribution(rates) -> np.ndarray:
    """Stationary distribution ``pi`` of an irreducible chain (``pi @ lam = 0``).

    Computed from the null space of ``lam.T``; entries are non-negative and
    sum to one.

    Raises
    ------
    IrreducibilityError
        If some mode cannot be reached from some other mode.
    """
    lam = validate_rates(rates)
    if not _reachability(lam).all():
        raise IrreducibilityError("rate matrix is reducible; no unique invariant distribution")
    ker = null_space(lam.T)
    if ker.shape[1] != 1:  # cannot happen for an irreducible generator
        raise IrreducibilityError("null space of the generator is not one-dimensional")
    pi = ker[:, 0]
    pi = pi / pi.sum()
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def expected_hitting_time(rates, i: int, j: int) -> float:
    """Mean first-passage time from mode ``i`` to mode ``j``.

    Solves the linear system ``-sum_m lam[k, m] * E[m -> j] = 1`` over the
    modes ``k != j`` with ``E[j -> j] = 0``.

    Raises
    ------
    UnreachableModeError
        If ``j`` cannot be reached from ``i``.
    """
    lam = validate_rates(rates)
    n = lam.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"mode indices ({i}, {j}) out of range for {n} modes")
    if i == j:
        return 0.0
    reach = _reachability(lam)
    if not reach[i, j]:
        raise UnreachableModeError(f"mode {j} is unreachable from mode {i}")
    keep = [k for k in range(n) if k != j and reach[k, j]]
    sub = lam[np.ix_(keep, keep)]
    times = np.linalg.solve(sub, -np.ones(len(keep)))
    return float(times[keep.index(i)])


def mode_difference_bound(rates, cost_bound: float) -> np.ndarray:
    """Pairwise upper bounds on value-function gaps between modes.

    Entry ``(i, j)`` is ``cost_bound * max(E[i -> j], E[j -> i])`` where the
    expectations are mean first-passage times of the mode chain; the matrix
    is symmetric with a zero diagonal.
    """
    lam = validate_rates(rates)
    n = lam.shape[0]
    bound = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            kab = expected_hitting_time(lam, a, b)
            kba = expected_hitting_time(lam, b, a)
            bound[a, b] = bound[b, a] = cost_bound * max(kab, kba)
    return bound


def sample_mode_path(rates, start_mode: int, horizon: float, rng: np.random.Generator):
    """Sample the mode chain exactly up to ``horizon``.

    Holding times are exponential with rate ``-lam[i, i]`` and the next mode
    is drawn with probability ``lam[i, j] / (-lam[i, i])``.  Returns a list of
    ``(switch_time, new_mode)`` pairs with strictly increasing times below
    ``horizon``; a zero rate matrix yields an empty list.
    """
    lam = validate_rates(rates)
    n = lam.shape[0]
    events = []
    t = 0.0
    mode = int(start_mode)
    while True:
        rate = -lam[mode, mode]
        if rate <= 0.0:
            break
        t += rng.exponential(1.0 / rate)
        if t >= horizon:
            break
        probs = lam[mode].copy()
        probs[mode] = 0.0
        probs /= rate
        mode = int(rng.choice(n, p=probs))
        events.append((t, mode))
    return events
