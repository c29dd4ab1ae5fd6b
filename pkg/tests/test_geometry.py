import numpy as np
import pytest

from fresco.models.basic_functions import ConstraintViolation, DomainError
from fresco.models.geometry import (arrival_rate, inter_platoon_spacing,
                                    intra_platoon_spacing, lane_geometries,
                                    lane_geometry, max_arrival_rate,
                                    network_vehicle_count)
from fresco.parameters import LaneScenario, NetworkParams

PARAMS = NetworkParams()

########## Spacing ##########
def test_intra_spacing_at_standstill():
    assert intra_platoon_spacing(0.0, PARAMS) == pytest.approx(2.0)

def test_intra_spacing_hand_value():
    assert intra_platoon_spacing(25.0, PARAMS) == pytest.approx(58.370, abs=1e-3)

def test_intra_spacing_grows_with_velocity():
    spacings = [intra_platoon_spacing(v, PARAMS) for v in np.arange(0.0, 29.9, 0.5)]
    assert all(b > a for a, b in zip(spacings, spacings[1:]))

@pytest.mark.parametrize('v', [30.0, 31.0, -1.0])
def test_intra_spacing_outside_domain(v):
    with pytest.raises(DomainError):
        intra_platoon_spacing(v, PARAMS)

def test_max_arrival_rate_hand_value():
    assert max_arrival_rate(25.0, PARAMS) == pytest.approx(0.19725, abs=1e-5)

def test_inter_spacing_at_max_rate_equals_intra():
    lam = max_arrival_rate(25.0, PARAMS)
    assert inter_platoon_spacing(25.0, lam, PARAMS) == pytest.approx(
        intra_platoon_spacing(25.0, PARAMS), rel=1e-12)

def test_inter_spacing_at_reduced_rate():
    lam = 0.75 * max_arrival_rate(25.0, PARAMS)
    assert inter_platoon_spacing(25.0, lam, PARAMS) == pytest.approx(100.62, abs=0.01)

def test_inter_spacing_rejects_rate_above_max():
    lam = 1.01 * max_arrival_rate(25.0, PARAMS)
    with pytest.raises(ConstraintViolation):
        inter_platoon_spacing(25.0, lam, PARAMS)
    # a constraint violation is also a domain error and a ValueError
    with pytest.raises(ValueError):
        inter_platoon_spacing(25.0, lam, PARAMS)

def test_arrival_rate_is_fraction_of_max():
    lane = LaneScenario(velocity=25.0, arrival_fraction=0.75)
    assert arrival_rate(lane, PARAMS) == pytest.approx(0.75 * max_arrival_rate(25.0, PARAMS))

########## Lane layout ##########
def test_lane_geometry_hand_values():
    g = lane_geometry(LaneScenario(velocity=25.0), PARAMS)
    assert g.interval == pytest.approx(126.74, abs=0.01)
    assert g.complete_platoons == 1
    assert g.incomplete_length == pytest.approx(73.26, abs=0.01)
    assert g.vehicles_complete == 2
    assert g.vehicles_incomplete == 2
    assert g.lane_vehicles == 4
    assert g.traversal_time == pytest.approx(8.0)

@pytest.mark.parametrize('fraction', [1.0, 0.75, 0.5, 0.2])
@pytest.mark.parametrize('v', [20.0, 22.5, 24.0, 26.5, 29.5])
def test_lane_geometry_invariants(v, fraction):
    g = lane_geometry(LaneScenario(velocity=v, arrival_fraction=fraction), PARAMS)
    assert g.inter_spacing >= g.intra_spacing
    assert g.incomplete_length >= 0
    assert g.incomplete_length == pytest.approx(
        PARAMS.coverage - g.complete_platoons * g.interval)
    assert g.lane_vehicles == g.vehicles_complete + g.vehicles_incomplete
    assert g.vehicles_incomplete <= PARAMS.platoon_size

@pytest.mark.parametrize('fraction', [1.0, 0.75])
def test_lane_vehicles_non_increasing_in_velocity(fraction):
    velocities = np.arange(20.0, 29.51, 0.5)
    counts = [lane_geometry(LaneScenario(velocity=v, arrival_fraction=fraction),
                            PARAMS).lane_vehicles for v in velocities]
    assert all(b <= a for a, b in zip(counts, counts[1:]))

def test_known_lane_counts_at_max_rate():
    counts = {v: lane_geometry(LaneScenario(velocity=v), PARAMS).lane_vehicles
              for v in (22.0, 25.0, 28.0, 29.5)}
    assert counts == {22.0: 5, 25.0: 4, 28.0: 2, 29.5: 2}

def test_lane_outside_velocity_range():
    with pytest.raises(DomainError):
        lane_geometry(LaneScenario(velocity=19.0), PARAMS)

def test_network_vehicle_count():
    lanes = [LaneScenario(velocity=25.0), LaneScenario(velocity=25.0)]
    assert network_vehicle_count(lane_geometries(lanes, PARAMS)) == 8
    with pytest.raises(DomainError):
        network_vehicle_count([])
