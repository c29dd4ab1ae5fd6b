import numpy as np
import pytest

from fresco.archive import ParetoArchive, non_dominated_mask
from fresco.models.basic_functions import InfeasibleError
from fresco.mopso import (Particle, SwarmState, brute_force_optimum, evaluate,
                          initialize, inertia_at, objective_for, run, select_optimum,
                          step)
from fresco.parameters import (GridMode, InertiaSchedule, LaneScenario,
                               NetworkParams, SwarmConfig)

PARAMS = NetworkParams()
LANES = (LaneScenario(velocity=26.5), LaneScenario(velocity=22.5))
SMALL = SwarmConfig(population=20, iterations=15, seed=3, warm_start=True)


########## Objectives ##########
def test_evaluate_fair_windows():
    lanes = (LaneScenario(velocity=25.0), LaneScenario(velocity=21.5))
    score = evaluate((128, 149), lanes, PARAMS)
    assert score.shape == (3,)
    assert score[:2].tolist() == [0.0, 0.0]
    assert score[2] > 0

def test_evaluate_rounds_to_integer_windows():
    np.testing.assert_array_equal(evaluate((127.6, 141.2), LANES, PARAMS),
                                  evaluate((128, 141), LANES, PARAMS))

########## Inertia ##########
def test_inertia_schedules():
    constant = SwarmConfig(iterations=10)
    assert inertia_at(0, constant) == inertia_at(9, constant) == 0.8
    rising = SwarmConfig(iterations=10, inertia_schedule=InertiaSchedule.EXPONENTIAL)
    assert inertia_at(0, rising) == pytest.approx(0.8)
    assert inertia_at(9, rising) == pytest.approx(1.2)
    assert inertia_at(50, rising) == pytest.approx(1.2)
    assert 0.8 < inertia_at(4, rising) < 1.2

########## Update rule ##########
def single_member_state(position, velocity, config):
    position = np.asarray(position, dtype=float)
    score = evaluate(position, LANES, PARAMS)
    archive = ParetoArchive(10, PARAMS.window_lb, PARAMS.window_ub)
    archive.merge([position], [score])
    rng = np.random.default_rng(0)
    particles = [Particle(position.copy(), np.asarray(velocity, dtype=float),
                          position.copy(), score.copy(), score.copy(),
                          np.random.default_rng(i)) for i in range(config.population)]
    return SwarmState(particles, archive, leaders=[0] * config.population, rng=rng)

def test_step_fixed_point():
    config = SwarmConfig(population=2, iterations=1)
    state = single_member_state((120, 140), (0.0, 0.0), config)
    step(state, LANES, PARAMS, config)
    for particle in state.particles:
        assert particle.position.tolist() == [120, 140]
        assert particle.velocity.tolist() == [0.0, 0.0]
    assert state.archive.positions.tolist() == [[120, 140]]
    assert state.iteration == 1

def test_step_clamps_position_and_velocity():
    config = SwarmConfig(population=2, iterations=1)
    state = single_member_state((256, 64), (10.0, -10.0), config)
    step(state, LANES, PARAMS, config)
    for particle in state.particles:
        assert particle.velocity.tolist() == [1.5, -1.5]
        assert particle.position.tolist() == [256, 64]

def test_initialize_warm_start():
    state = initialize(LANES, PARAMS, SMALL)
    assert state.particles[0].position.tolist() == [121, 142]
    assert len(state.leaders) == SMALL.population
    assert all(0 <= leader < len(state.archive) for leader in state.leaders)
    for particle in state.particles:
        assert np.all(particle.position >= PARAMS.window_lb)
        assert np.all(particle.position <= PARAMS.window_ub)

########## Runs ##########
def test_run_is_deterministic():
    first_archive, first = run(LANES, PARAMS, SMALL)
    second_archive, second = run(LANES, PARAMS, SMALL)
    assert first == second
    np.testing.assert_array_equal(first_archive.positions, second_archive.positions)
    np.testing.assert_array_equal(first_archive.objectives, second_archive.objectives)


def test_searches_release_cached_scores():
    run(LANES, PARAMS, SMALL)
    assert len(objective_for(LANES, PARAMS)) == 0
    params = NetworkParams(window_lb=120, window_ub=142)
    brute_force_optimum(LANES, params, SMALL.k_bound)
    assert len(objective_for(LANES, params)) == 0

@pytest.mark.parametrize('grid_mode', list(GridMode))
def test_archive_is_consistent(grid_mode):
    config = SMALL.model_copy(update={'grid_mode': grid_mode})
    archive, optimum = run(LANES, PARAMS, config)
    assert len(archive) <= config.archive_factor * config.population
    assert np.all(non_dominated_mask(archive.objectives))
    for position, objective in zip(archive.positions, archive.objectives):
        np.testing.assert_array_equal(evaluate(position, LANES, PARAMS), objective)
    score = evaluate(optimum.windows, LANES, PARAMS)
    assert max(score[:-1]) <= config.k_bound

def test_run_with_stochastic_coefficients():
    config = SMALL.model_copy(update={'stochastic_coefficients': True,
                                      'inertia_schedule': InertiaSchedule.EXPONENTIAL})
    _, optimum = run(LANES, PARAMS, config)
    assert max(evaluate(optimum.windows, LANES, PARAMS)[:-1]) <= config.k_bound

def test_infeasible_bound():
    config = SwarmConfig(population=10, iterations=3, k_bound=1e-9)
    with pytest.raises(InfeasibleError) as info:
        run(LANES, PARAMS, config)
    assert info.value.best_violation > 0

def test_select_optimum_prefers_lowest_feasible_age():
    archive = ParetoArchive(10, 64, 256)
    archive.merge([[100, 100], [120, 120], [140, 140]],
                  [[0.02, 0.0, 1.0], [0.004, 0.001, 2.0], [0.0, 0.0, 3.0]])
    assert select_optimum(archive, 0.005) == 1
    with pytest.raises(InfeasibleError):
        select_optimum(archive, -1.0)

def test_single_lane_matches_exhaustive_search():
    params = NetworkParams(lane_count=1, window_lb=116, window_ub=132)
    lanes = (LaneScenario(velocity=25.0),)
    config = SwarmConfig(population=40, iterations=20, seed=1)
    _, optimum = run(lanes, params, config)
    expected, _ = brute_force_optimum(lanes, params, config.k_bound)
    assert optimum == expected

def test_brute_force_infeasible():
    with pytest.raises(InfeasibleError):
        brute_force_optimum(LANES, NetworkParams(window_lb=200, window_ub=210), 0.005)

@pytest.mark.slow
def test_default_scenario_near_exhaustive_optimum():
    config = SwarmConfig(seed=0)
    assert not config.warm_start
    _, optimum = run(LANES, PARAMS, config)
    expected, expected_score = brute_force_optimum(LANES, PARAMS, config.k_bound)
    score = evaluate(optimum.windows, LANES, PARAMS)
    assert max(score[:-1]) <= config.k_bound
    assert score[-1] <= expected_score[-1] * 1.01
    assert expected.windows[0] < expected.windows[1]
