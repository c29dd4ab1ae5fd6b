import math

import pytest
from pydantic import ValidationError

from fresco.models.aoi import network_average_age
from fresco.models.dcf import shs_rates, transmission_probability
from fresco.parameters import (BackoffMode, LaneScenario, NetworkParams,
                               SimConfig, SimMode)
from fresco.sim import (DcfSimulator, _age_area, jain_index, run_snapshot, run_traversal,
                        simulate)

PARAMS = NetworkParams()
# one back-off slot per transmission
ONE_SLOT = NetworkParams(tx_time=60e-6, lane_count=1)


def snapshot(windows, counts, slots=400_000, **kwargs):
    return SimConfig(windows=windows, lane_counts=counts, duration_slots=slots, **kwargs)

def traversal(velocities, windows, slots=4_000_000, **kwargs):
    lanes = tuple(LaneScenario(velocity=v) for v in velocities)
    return SimConfig(mode=SimMode.TRAVERSAL, windows=windows, lanes=lanes,
                     duration_slots=slots, **kwargs)

########## Helpers ##########
def test_jain_index():
    assert jain_index([3.0, 3.0, 3.0]) == pytest.approx(1.0)
    assert jain_index([1.0, 0.0]) == pytest.approx(0.5)
    assert jain_index([]) is None
    assert jain_index([0.0, 0.0]) is None

def test_age_area():
    assert _age_area(0.0, 0, 2, 0) == pytest.approx(2.0)
    assert _age_area(0.0, 0, 2, 1) == pytest.approx(1.5)
    assert _age_area(5.0, 0, 2, 3) == 0.0

def test_config_validation():
    with pytest.raises(ValidationError):
        SimConfig(windows=(128, 128))
    with pytest.raises(ValidationError):
        SimConfig(windows=(128, 128), lane_counts=(4,))
    with pytest.raises(ValidationError):
        SimConfig(mode=SimMode.TRAVERSAL, windows=(128,), lane_counts=(4,))

########## Snapshot ##########
def test_slots_add_up():
    result = run_snapshot(snapshot((64, 200), (3, 2), slots=300_000))
    assert result.total_slots == result.idle_slots + PARAMS.tx_slots * (
        result.success_count + result.collision_count)
    assert sum(result.per_vehicle_success_count) == result.success_count
    assert result.total_slots >= 300_000
    assert 0 < result.channel_busy_fraction < 1

def test_snapshot_reports_ages():
    result = run_snapshot(snapshot((128, 128), (4, 4), slots=200_000))
    assert len(result.per_link_mean_age) == 8
    assert result.network_mean_age == pytest.approx(
        sum(result.per_link_mean_age) / 8)
    assert result.packets_per_traversal == []
    assert result.jain_index is None

def test_single_vehicle_hand_values():
    config = snapshot((3,), (1,), slots=300_000, params=ONE_SLOT)
    result = run_snapshot(config)
    assert result.collision_count == 0
    assert result.empirical_tau[0] == pytest.approx(0.5, rel=0.01)
    assert result.network_mean_age / ONE_SLOT.slot_time == pytest.approx(13 / 6, rel=0.01)

def test_collided_vehicles_redraw_from_their_window():
    # window 1 redraws counter 0, so two vehicles collide forever
    config = snapshot((1,), (2,), slots=10_000, params=ONE_SLOT)
    assert DcfSimulator(config).collision_window(0) == 1
    result = run_snapshot(config)
    assert result.success_count == 0
    assert result.idle_slots == 0
    assert result.collision_count == 10_000 // ONE_SLOT.tx_slots

def test_same_seed_same_run():
    config = snapshot((100, 150), (3, 3), slots=200_000, seed=9)
    assert simulate(config) == simulate(config)
    other = simulate(config.model_copy(update={'seed': 10}))
    assert other.per_vehicle_success_count != simulate(config).per_vehicle_success_count

@pytest.mark.slow
@pytest.mark.parametrize('mode', list(BackoffMode))
def test_empirical_tau_matches_attempt_probability(mode):
    counts = (4, 4)
    result = run_snapshot(snapshot((128, 128), counts, slots=2_000_000, backoff_mode=mode))
    tau = transmission_probability(128)
    per_vehicle = [s + c for s, c in zip(result.per_vehicle_success_count,
                                         result.per_vehicle_collision_count)]
    for lane in range(2):
        attempts = sum(per_vehicle[4 * lane:4 * lane + 4])
        trials = attempts + counts[lane] * result.idle_slots
        sigma = math.sqrt(tau * (1 - tau) / trials)
        assert abs(result.empirical_tau[lane] - tau) <= 3 * sigma

@pytest.mark.slow
def test_memoryless_backoff_age_near_analytic():
    config = snapshot((128, 128), (4, 4), slots=2_000_000,
                      backoff_mode=BackoffMode.GEOMETRIC)
    analytic = network_average_age(shs_rates((128, 128), (4, 4), PARAMS)).network_age
    result = run_snapshot(config)
    assert result.network_mean_age == pytest.approx(analytic, rel=0.15)

@pytest.mark.slow
def test_uniform_backoff_age_below_analytic():
    analytic = network_average_age(shs_rates((128, 128), (4, 4), PARAMS)).network_age
    result = run_snapshot(snapshot((128, 128), (4, 4), slots=2_000_000))
    assert 0.5 < result.network_mean_age / analytic < 1.0

########## Traversal ##########
def test_traversal_reports_no_ages():
    result = run_traversal(traversal((26.5, 22.5), (121, 142), slots=400_000))
    assert result.per_link_mean_age == []
    assert result.network_mean_age is None
    assert len(result.packets_per_traversal) == 2
    assert result.total_slots == result.idle_slots + PARAMS.tx_slots * (
        result.success_count + result.collision_count)

@pytest.mark.slow
def test_fair_windows_equalize_packets():
    result = run_traversal(traversal((26.5, 22.5), (121, 142)))
    fast, slow = result.packets_per_traversal
    assert fast > 0 and slow > 0
    assert abs(fast - slow) / max(fast, slow) <= 0.10
    assert result.jain_index > 0.99

@pytest.mark.slow
def test_standard_window_favours_slow_lane():
    fast, slow = run_traversal(traversal((26.5, 22.5), (128, 128))).packets_per_traversal
    assert fast < slow

@pytest.mark.slow
def test_symmetric_lanes_get_equal_packets():
    first, second = run_traversal(traversal((25.0, 25.0), (128, 128))).packets_per_traversal
    assert abs(first - second) / max(first, second) <= 0.10
