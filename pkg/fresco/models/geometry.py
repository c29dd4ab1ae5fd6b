'''
Platoon geometry on one lane: spacing from velocity, platoon arrival rates and
the mean number of vehicles inside the base-station coverage.

Arrivals enter only as mean rates; platoons are laid out deterministically at
their mean spacing.
'''

import math
from dataclasses import dataclass

from .basic_functions import (ConstraintViolation, DomainError, tolerant_ceil,
                              tolerant_floor)


@dataclass(frozen=True)
class LaneGeometry:
    """
    Mean layout of one lane inside the coverage. Lengths in m.

    Attributes:
        intra_spacing (float): Gap between vehicles of one platoon.
        inter_spacing (float): Gap between consecutive platoons.
        platoon_length (float): Length of one complete platoon.
        interval (float): Platoon length plus the following inter spacing.
        complete_platoons (int): Platoon intervals fitting in the coverage.
        incomplete_length (float): Coverage left after the complete intervals.
        vehicles_complete (int), vehicles_incomplete (int)
        lane_vehicles (int): Total vehicles on the lane.
        arrival_rate (float): Platoons per second.
        traversal_time (float): Seconds a vehicle spends in the coverage.
    """
    intra_spacing: float
    inter_spacing: float
    platoon_length: float
    interval: float
    complete_platoons: int
    incomplete_length: float
    vehicles_complete: int
    vehicles_incomplete: int
    lane_vehicles: int
    arrival_rate: float
    traversal_time: float


def intra_platoon_spacing(v, params):
    """Spacing policy that grows with speed and diverges at v_max."""
    if v < 0:
        raise DomainError(f'velocity must be non-negative, got {v}')
    ratio = v / params.v_max
    denominator = 1 - ratio**4
    if denominator <= 0:
        raise DomainError(f'velocity {v} is not below v_max={params.v_max}')
    return (params.min_intra_spacing + v * params.time_headway) / math.sqrt(denominator)

def max_arrival_rate(v, params):
    """Arrival rate reached when platoons follow each other at intra spacing."""
    rw = intra_platoon_spacing(v, params)
    return v / (params.platoon_size * (params.vehicle_length + rw))

def inter_platoon_spacing(v, lam, params):
    if lam <= 0:
        raise DomainError(f'arrival rate must be positive, got {lam}')
    lam_max = max_arrival_rate(v, params)
    # relative slack so that lam_max itself round-trips
    if lam > lam_max * (1 + 1e-12):
        raise ConstraintViolation(f'arrival rate {lam} exceeds maximum {lam_max} '
                                  f'at velocity {v}')
    rw = intra_platoon_spacing(v, params)
    rs = v / lam - ((params.platoon_size - 1) * (params.vehicle_length + rw)
                    + params.vehicle_length)
    return max(rs, rw)

def check_lane(lane, params):
    if not params.v_min <= lane.velocity <= params.v_max:
        raise DomainError(f'velocity {lane.velocity} outside '
                          f'[{params.v_min}, {params.v_max}]')
    if not 0 < lane.arrival_fraction <= 1:
        raise DomainError(f'arrival fraction {lane.arrival_fraction} outside (0, 1]')
    return lane

def arrival_rate(lane, params):
    return lane.arrival_fraction * max_arrival_rate(lane.velocity, params)

def lane_geometry(lane, params):
    check_lane(lane, params)
    v = lane.velocity
    s = params.vehicle_length
    n_p = params.platoon_size

    rw = intra_platoon_spacing(v, params)
    lam = arrival_rate(lane, params)
    rs = inter_platoon_spacing(v, lam, params)
    platoon_length = (n_p - 1) * (s + rw) + s
    interval = platoon_length + rs

    complete = tolerant_floor(params.coverage / interval)
    incomplete_length = max(0.0, params.coverage - complete * interval)
    vehicles_complete = complete * n_p
    # a partial platoon never holds more than a full one
    vehicles_incomplete = min(n_p, tolerant_ceil(incomplete_length / (s + rw)))

    return LaneGeometry(intra_spacing=rw,
                        inter_spacing=rs,
                        platoon_length=platoon_length,
                        interval=interval,
                        complete_platoons=complete,
                        incomplete_length=incomplete_length,
                        vehicles_complete=vehicles_complete,
                        vehicles_incomplete=vehicles_incomplete,
                        lane_vehicles=vehicles_complete + vehicles_incomplete,
                        arrival_rate=lam,
                        traversal_time=params.coverage / v)

def lane_geometries(lanes, params):
    return [lane_geometry(lane, params) for lane in lanes]

def network_vehicle_count(lanes):
    """Sum of vehicles over a list of LaneGeometry."""
    if len(lanes) == 0:
        raise DomainError('at least one lane is required')
    return sum(g.lane_vehicles for g in lanes)
