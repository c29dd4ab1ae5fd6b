"""
Multi-objective particle swarm over per-lane minimum contention windows.

Each particle holds a real-valued window vector. It is scored at the nearest
integer windows on N+1 objectives: the fairness deviation of every lane and
the network average age. Non-dominated scores are kept in a ParetoArchive,
and every particle follows a leader drawn from the archive by congestion
roulette. The answer is the archive member with the lowest age among those
whose fairness deviations all stay within k_bound.
"""
import functools
import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .archive import ParetoArchive, dominates, roulette_select
from .models.aoi import network_average_age
from .models.basic_functions import InfeasibleError
from .models.dcf import WindowAssignment, shs_rates
from .models.fairness import equal_share_windows, fairness_objectives
from .models.geometry import lane_geometries
from .parameters import GridMode, InertiaSchedule

logger = logging.getLogger(__name__)


class Objective:
    """
    Scores window vectors for one traffic scenario. Lane geometry does not
    depend on the windows, so it is computed once; scores are cached by the
    rounded windows until a search ends and clears them.

    Attributes:
        lanes (tuple[LaneScenario])
        params (NetworkParams)
        geometries (list[LaneGeometry])
        counts (tuple[int]): Vehicles on each lane.
    """
    def __init__(self, lanes, params):
        self.lanes = tuple(lanes)
        self.params = params
        self.geometries = lane_geometries(self.lanes, params)
        self.counts = tuple(g.lane_vehicles for g in self.geometries)
        self._scores = {}

    def __call__(self, position):
        windows = tuple(int(w) for w in np.rint(np.asarray(position, dtype=float)))
        if windows not in self._scores:
            assignment = WindowAssignment.checked(windows, self.params)
            deviations = fairness_objectives(self.lanes, assignment, self.params)
            age = network_average_age(shs_rates(assignment, self.counts, self.params))
            self._scores[windows] = np.array([*deviations, age.network_age])
        return self._scores[windows].copy()

    def __len__(self):
        return len(self._scores)

    def clear(self):
        self._scores.clear()

    @property
    def dimension(self):
        return len(self.lanes) + 1


@functools.lru_cache(maxsize=16)
def _objective_for(lanes, params):
    return Objective(lanes, params)

def objective_for(lanes, params):
    return _objective_for(tuple(lanes), params)

def evaluate(position, lanes, params):
    """(F_K_1, ..., F_K_N, F_age) at the nearest integer windows."""
    return objective_for(lanes, params)(position)


@dataclass
class Particle:
    """
    Attributes:
        position (numpy.array): Real-valued windows, one per lane.
        velocity (numpy.array)
        personal_best (numpy.array)
        objective (numpy.array): Score of position.
        best_objective (numpy.array): Score of personal_best.
        rng (numpy.random.Generator): Stream owned by this particle.
    """
    position: np.ndarray
    velocity: np.ndarray
    personal_best: np.ndarray
    objective: np.ndarray
    best_objective: np.ndarray
    rng: np.random.Generator


@dataclass
class SwarmState:
    particles: list
    archive: ParetoArchive
    leaders: list = field(default_factory=list)
    iteration: int = 0
    rng: np.random.Generator = None


def inertia_at(iteration, config):
    """Inertia factor of an iteration; the exponential schedule ends at inertia_cap."""
    if config.inertia_schedule is InertiaSchedule.CONSTANT or config.iterations < 2 \
            or config.inertia <= 0:
        return config.inertia
    growth = config.inertia_cap / config.inertia
    return config.inertia * growth ** (min(iteration, config.iterations - 1)
                                       / (config.iterations - 1))

def _new_archive(params, config):
    mesh_div = config.mesh_div if config.grid_mode is GridMode.MESHDIV else None
    return ParetoArchive(config.archive_factor * config.population, params.window_lb,
                         params.window_ub, mesh_div=mesh_div, k_bound=config.k_bound)

def _refresh_leaders(state, config):
    probs = state.archive.selection_probabilities(config.alpha)
    state.leaders = [roulette_select(probs, particle.rng) for particle in state.particles]

def initialize(lanes, params, config):
    """
    Random integer positions and velocities for every particle, personal bests
    equal to the starting positions, and an archive built from them.
    """
    objective = objective_for(lanes, params)
    dimension = len(lanes)
    streams = np.random.SeedSequence(config.seed).spawn(config.population + 1)
    swarm_rng = np.random.default_rng(streams[0])

    particles = []
    for i, stream in enumerate(streams[1:]):
        rng = np.random.default_rng(stream)
        position = rng.integers(params.window_lb, params.window_ub + 1,
                                size=dimension).astype(float)
        if i == 0 and config.warm_start:
            fair = equal_share_windows(lanes, params)
            position = np.clip(np.rint(fair), params.window_lb, params.window_ub)
        velocity = rng.uniform(config.pso_v_min, config.pso_v_max, size=dimension)
        score = objective(position)
        particles.append(Particle(position, velocity, position.copy(), score,
                                  score.copy(), rng))

    archive = _new_archive(params, config)
    archive.merge([p.personal_best for p in particles],
                  [p.best_objective for p in particles], swarm_rng)
    state = SwarmState(particles, archive, rng=swarm_rng)
    _refresh_leaders(state, config)
    return state

def step(state, lanes, params, config, rng=None):
    """
    One swarm iteration: move every particle towards its personal best and
    its leader, keep a move only when it dominates the old position, then
    merge the new scores into the archive and draw new leaders.
    """
    objective = objective_for(lanes, params)
    rng = state.rng if rng is None else rng
    omega = inertia_at(state.iteration, config)
    candidates, scores = [], []

    for particle, leader in zip(state.particles, state.leaders):
        cognitive, social = config.cognitive, config.social
        if config.stochastic_coefficients:
            cognitive = cognitive * particle.rng.random(particle.position.size)
            social = social * particle.rng.random(particle.position.size)
        gbest = state.archive.positions[leader]

        velocity = (omega * particle.velocity
                    + cognitive * (particle.personal_best - particle.position)
                    + social * (gbest - particle.position))
        velocity = np.clip(velocity, config.pso_v_min, config.pso_v_max)
        position = np.clip(particle.position + velocity, params.window_lb,
                           params.window_ub)
        score = objective(position)

        if dominates(score, particle.objective):
            particle.position, particle.objective = position, score
        particle.velocity = velocity
        if dominates(particle.objective, particle.best_objective):
            particle.personal_best = particle.position.copy()
            particle.best_objective = particle.objective.copy()
        candidates.append(position)
        scores.append(score)

    positions = [p.personal_best for p in state.particles] + candidates
    objectives = [p.best_objective for p in state.particles] + scores
    state.archive.merge(positions, objectives, rng)
    _refresh_leaders(state, config)
    state.iteration += 1
    return state

def select_optimum(archive, k_bound):
    """
    Index of the lowest-age member whose fairness deviations all stay within
    k_bound. Raises InfeasibleError carrying the smallest worst-lane excess.
    """
    index = archive.best_feasible(k_bound)
    if index is None:
        excess = np.max(archive.objectives[:, :-1], axis=1) - k_bound
        best = float(excess.min()) if excess.size else None
        raise InfeasibleError(f'no archive member keeps every fairness deviation '
                              f'within {k_bound}', best_violation=best)
    return index

def run(lanes, params, config):
    """Returns (ParetoArchive, WindowAssignment)."""
    lanes = tuple(lanes)
    logger.info('swarm of %d particles, %d iterations, %d lanes',
                config.population, config.iterations, len(lanes))
    objective = objective_for(lanes, params)
    try:
        state = initialize(lanes, params, config)
        for _ in range(config.iterations):
            step(state, lanes, params, config)
            logger.debug('iteration %d: archive holds %d members', state.iteration,
                         len(state.archive))
    finally:
        objective.clear()
    index = select_optimum(state.archive, config.k_bound)
    optimum = WindowAssignment.checked(state.archive.positions[index], params)
    logger.info('optimal windows %s with age %.6g s', optimum.windows,
                state.archive.objectives[index, -1])
    return state.archive, optimum

def brute_force_optimum(lanes, params, k_bound):
    """
    Exhaustive counterpart of `run`: every integer window vector in the bounds.
    Returns (WindowAssignment, objective vector).
    """
    objective = objective_for(lanes, params)
    best, best_score, best_excess = None, None, None
    try:
        for windows in itertools.product(range(params.window_lb, params.window_ub + 1),
                                         repeat=len(lanes)):
            score = objective(windows)
            excess = float(np.max(score[:-1])) - k_bound
            if excess <= 0:
                if best is None or score[-1] < best_score[-1]:
                    best, best_score = windows, score
            elif best_excess is None or excess < best_excess:
                best_excess = excess
    finally:
        objective.clear()
    if best is None:
        raise InfeasibleError(f'no window vector keeps every fairness deviation '
                              f'within {k_bound}', best_violation=best_excess)
    return WindowAssignment.checked(best, params), best_score
