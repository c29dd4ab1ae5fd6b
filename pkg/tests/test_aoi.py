import numpy as np
import pytest

from fresco.models.aoi import (ShsInstance, generator_matrix, link_age,
                               link_average_age, markov_oracle,
                               network_average_age, normalization_factor,
                               oracle_correlations, stationary_distribution,
                               steady_state_probs, symmetric_age)
from fresco.models.basic_functions import DomainError
from fresco.models.dcf import ShsRates, shs_rates
from fresco.parameters import NetworkParams
from fresco.verification import random_instance

PARAMS = NetworkParams()

########## Closed form ##########
def test_single_link_age():
    assert link_age(0, ShsInstance([1.0], [1.0])) == pytest.approx(2.5)

def test_symmetric_two_link_age():
    instance = ShsInstance([2.0, 2.0], [1.0, 1.0])
    assert normalization_factor(instance) == pytest.approx(5.0)
    assert link_age(0, instance) == pytest.approx(3.3, abs=1e-12)
    assert link_age(1, instance) == pytest.approx(3.3, abs=1e-12)

def test_default_scenario_network_age():
    rates = shs_rates((128, 128), (4, 4), PARAMS)
    result = network_average_age(rates)
    assert result.network_age == pytest.approx(0.0835, rel=1e-3)
    assert result.per_lane_age == pytest.approx([result.network_age] * 2)

def test_lane_rates_match_per_vehicle_rates():
    rates = shs_rates((100, 180), (3, 5), PARAMS)
    instance = rates.expand()
    per_vehicle = [link_age(k, instance) for k in range(instance.link_count)]
    result = network_average_age(rates)
    assert result.per_lane_age[0] == pytest.approx(per_vehicle[0], rel=1e-12)
    assert result.per_lane_age[1] == pytest.approx(per_vehicle[-1], rel=1e-12)
    assert result.network_age == pytest.approx(np.mean(per_vehicle), rel=1e-12)
    assert link_average_age(1, rates) == pytest.approx(per_vehicle[-1], rel=1e-12)

def test_smaller_window_means_lower_lane_age():
    rates = shs_rates((100, 180), (4, 4), PARAMS)
    assert link_average_age(0, rates) < link_average_age(1, rates)

def test_instance_validation():
    with pytest.raises(DomainError):
        ShsInstance([1.0, 2.0], [1.0])
    with pytest.raises(DomainError):
        ShsInstance([0.0], [1.0])
    with pytest.raises(DomainError):
        link_age(2, ShsInstance([1.0, 1.0], [1.0, 1.0]))

########## Symmetric age ##########
def test_symmetric_age_equal_windows():
    hs = 1 / PARAMS.tx_time
    assert symmetric_age(hs, 2, (128, 128), PARAMS.slot_time) == pytest.approx(5 / hs)
    assert symmetric_age(hs, 2, (128, 128), PARAMS.slot_time, averaged=True) \
        == pytest.approx(3 / hs)

def test_symmetric_age_penalizes_unequal_windows():
    hs = 1 / PARAMS.tx_time
    equal = symmetric_age(hs, 3, (100, 100, 100), PARAMS.slot_time)
    assert symmetric_age(hs, 3, (80, 100, 120), PARAMS.slot_time) > equal

def test_averaged_symmetric_age_close_to_exact():
    hs = 1 / PARAMS.tx_time
    rng = np.random.default_rng(7)
    for _ in range(30):
        nv = int(rng.integers(1, 9))
        windows = rng.integers(PARAMS.window_lb, PARAMS.window_ub + 1, nv)
        backoff = 2 / ((windows - 1) * PARAMS.slot_time)
        exact = network_average_age(ShsRates(tuple(backoff), (hs,) * nv, (1,) * nv)).network_age
        approx = symmetric_age(hs, nv, list(windows), PARAMS.slot_time, averaged=True)
        assert abs(exact - approx) / exact <= 2 * hs / backoff.min()

def test_symmetric_age_domain():
    with pytest.raises(DomainError):
        symmetric_age(1.0, 2, (128,), PARAMS.slot_time)
    with pytest.raises(DomainError):
        symmetric_age(1.0, 1, (1,), PARAMS.slot_time)
    with pytest.raises(DomainError):
        symmetric_age(0.0, 1, (128,), PARAMS.slot_time)

########## Markov oracle ##########
def test_generator_rows_sum_to_zero():
    q = generator_matrix(ShsInstance([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]))
    np.testing.assert_allclose(q.sum(axis=1), 0.0, atol=1e-12)

def test_stationary_distribution_matches_closed_form():
    rng = np.random.default_rng(3)
    for _ in range(20):
        instance = random_instance(rng)
        np.testing.assert_allclose(stationary_distribution(instance),
                                   steady_state_probs(instance), rtol=1e-9, atol=1e-14)

def test_oracle_single_link():
    assert markov_oracle(ShsInstance([1.0], [1.0]))[0] == pytest.approx(2.5, rel=1e-12)

def test_oracle_symmetric_pair():
    ages = markov_oracle(ShsInstance([2.0, 2.0], [1.0, 1.0]))
    np.testing.assert_allclose(ages, [3.3, 3.3], rtol=1e-12)

def test_oracle_idle_state_correlations():
    instance = ShsInstance([3.0, 0.5, 7.0], [2.0, 9.0, 0.3])
    for k in range(instance.link_count):
        v = oracle_correlations(instance, k)
        assert v[0, 0] == pytest.approx(1 / instance.backoff_rates[k], rel=1e-9)
        assert v[0, 1] == pytest.approx(0.0, abs=1e-12)

def test_oracle_matches_closed_form_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        instance = random_instance(rng)
        closed = [link_age(k, instance) for k in range(instance.link_count)]
        np.testing.assert_allclose(markov_oracle(instance), closed, rtol=1e-9)

@pytest.mark.parametrize('seed', [0, 1, 99])
def test_oracle_equivalence_for_any_seed(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        instance = random_instance(rng)
        closed = [link_age(k, instance) for k in range(instance.link_count)]
        np.testing.assert_allclose(markov_oracle(instance), closed, rtol=1e-9)

def test_oracle_link_limit():
    instance = ShsInstance(np.ones(13), np.ones(13))
    with pytest.raises(DomainError):
        markov_oracle(instance)
