"""
The Pareto archive of the swarm: mutually non-dominated window assignments,
the grid that measures how crowded each part of the archive is, and the
roulette that picks a leader with preference for sparse cells.

All objectives are minimized.
"""
import logging

import numpy as np

from .models.basic_functions import DomainError

logger = logging.getLogger(__name__)


def dominates(a, b):
    """True if a is no worse than b everywhere and strictly better somewhere."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f'objective lengths differ: {a.size} and {b.size}')
    return bool(np.all(a <= b) and np.any(a < b))

def non_dominated_mask(objectives):
    """Boolean mask of the rows of objectives that no other row dominates."""
    f = np.asarray(objectives, dtype=float)
    if f.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    no_worse = np.all(f[:, None, :] <= f[None, :, :], axis=2)
    better = np.any(f[:, None, :] < f[None, :, :], axis=2)
    dominated = np.any(no_worse & better, axis=0)
    return ~dominated

def grid_index(position, resolution, window_lb, window_ub):
    """
    Cell of a position when every axis of [window_lb, window_ub] is cut into
    `resolution` equal parts. A position on the upper bound lands in cell
    `resolution`.
    """
    p = np.asarray(position, dtype=float)
    span = window_ub - window_lb
    if span <= 0:
        return np.zeros(p.shape, dtype=int)
    return np.floor((p - window_lb) * resolution / span + 1e-9).astype(int)

def cell_occupancy(grid_indices):
    """For every member, how many members share its grid cell."""
    cells = np.asarray(grid_indices)
    if cells.shape[0] == 0:
        return np.zeros(0, dtype=int)
    _, inverse, counts = np.unique(cells, axis=0, return_inverse=True,
                                   return_counts=True)
    return counts[inverse.reshape(-1)]

def selection_probabilities(grid_indices, alpha):
    """
    Leader probabilities from cell congestion: a member sharing its cell with
    n_g - 1 others gets weight 1/n_g**alpha, normalized over the archive.
    """
    occupancy = cell_occupancy(grid_indices)
    if occupancy.size == 0:
        raise DomainError('archive is empty')
    weights = 1 / occupancy.astype(float)**alpha
    return weights / weights.sum()

def roulette_select(probs, rng=None, draw=None):
    """
    Index of the first member whose cumulative probability exceeds one uniform
    draw. Pass `draw` to fix the draw instead of taking it from rng.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.size == 0:
        raise DomainError('cannot select from an empty probability vector')
    if draw is None:
        draw = rng.random()
    cumulative = np.cumsum(probs)
    index = int(np.searchsorted(cumulative, draw, side='right'))
    return min(index, probs.size - 1)


class ParetoArchive:
    """
    Attributes:
        positions (numpy.array): Integer window vectors, one row per member.
        objectives (numpy.array): Objective vectors, one row per member.
        grid_indices (numpy.array): Grid cell of each member.
        capacity (int): Largest number of members kept.
        window_lb (int), window_ub (int): Bounds of the search space.
        mesh_div (int | None): Fixed grid resolution; None resolves the grid
            by the current archive size.
    """

    def __init__(self, capacity, window_lb, window_ub, mesh_div=None, k_bound=None):
        self.capacity = capacity
        self.window_lb = window_lb
        self.window_ub = window_ub
        self.mesh_div = mesh_div
        self.k_bound = k_bound
        self.positions = np.empty((0, 0), dtype=int)
        self.objectives = np.empty((0, 0))
        self.grid_indices = np.empty((0, 0), dtype=int)

    def __len__(self):
        return self.positions.shape[0]

    @property
    def resolution(self):
        return self.mesh_div if self.mesh_div is not None else max(len(self), 1)

    def merge(self, positions, objectives, rng=None):
        """
        Add candidate members, keep only the non-dominated ones (one per
        integer position), and prune to capacity.
        """
        positions = np.rint(np.asarray(positions, dtype=float)).astype(int)
        objectives = np.asarray(objectives, dtype=float)
        if len(self):
            positions = np.vstack([self.positions, positions])
            objectives = np.vstack([self.objectives, objectives])

        _, first = np.unique(positions, axis=0, return_index=True)
        first = np.sort(first)
        positions, objectives = positions[first], objectives[first]

        keep = non_dominated_mask(objectives)
        self.positions = positions[keep]
        self.objectives = objectives[keep]
        self._refresh_grid()
        if len(self) > self.capacity:
            self._prune(rng)
        return self

    def _refresh_grid(self):
        self.grid_indices = grid_index(self.positions, self.resolution,
                                       self.window_lb, self.window_ub)

    def feasible_mask(self, k_bound=None):
        """Members whose fairness deviations all stay within k_bound."""
        bound = self.k_bound if k_bound is None else k_bound
        if bound is None or not len(self):
            return np.zeros(len(self), dtype=bool)
        return np.all(self.objectives[:, :-1] <= bound, axis=1)

    def best_feasible(self, k_bound=None):
        """Index of the feasible member with the lowest age, or None."""
        feasible = np.flatnonzero(self.feasible_mask(k_bound))
        if feasible.size == 0:
            return None
        ages = self.objectives[feasible, -1]
        return int(feasible[np.argmin(ages)])

    def _prune(self, rng):
        # remove one member at a time from the most crowded cell, never the
        # best feasible member
        protected = self.best_feasible()
        protected_position = None if protected is None else self.positions[protected].copy()
        while len(self) > self.capacity:
            crowding = cell_occupancy(self.grid_indices)
            if protected_position is not None:
                crowding[np.all(self.positions == protected_position, axis=1)] = -1
            candidates = np.flatnonzero(crowding == crowding.max())
            victim = candidates[rng.integers(candidates.size)] if rng is not None \
                else candidates[-1]
            self.positions = np.delete(self.positions, victim, axis=0)
            self.objectives = np.delete(self.objectives, victim, axis=0)
            self._refresh_grid()
        logger.debug('archive pruned to %d members', len(self))

    def selection_probabilities(self, alpha):
        return selection_probabilities(self.grid_indices, alpha)

    def rows(self):
        """(position, objective) pairs, as plain lists."""
        return [(p.tolist(), f.tolist()) for p, f in zip(self.positions, self.objectives)]
