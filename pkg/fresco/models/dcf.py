'''
802.11 DCF access quantities under a fixed minimum contention window: attempt
and collision probabilities, the collision-free window bound, and the
back-off and service rates that drive the age model.
'''

import itertools
from dataclasses import dataclass

import numpy as np
from quicktions import Fraction

from ..parameters import NetworkParams
from .basic_functions import (DomainError, InfeasibleError, require_index,
                              require_positive, require_same_length)


@dataclass(frozen=True)
class WindowAssignment:
    """
    One minimum contention window per lane, the decision variable of the
    optimizer. Behaves as a read-only sequence of ints.
    """
    windows: tuple

    def __post_init__(self):
        object.__setattr__(self, 'windows', tuple(int(w) for w in self.windows))

    @classmethod
    def checked(cls, windows, params):
        """Build an assignment and enforce the bounds and length of params."""
        assignment = cls(tuple(windows))
        if len(assignment) != params.lane_count:
            raise DomainError(f'{len(assignment)} windows for {params.lane_count} lanes')
        for w in assignment:
            if not params.window_lb <= w <= params.window_ub:
                raise DomainError(f'window {w} outside '
                                  f'[{params.window_lb}, {params.window_ub}]')
        return assignment

    def __len__(self):
        return len(self.windows)

    def __getitem__(self, i):
        return self.windows[i]

    def __iter__(self):
        return iter(self.windows)


@dataclass(frozen=True)
class ShsRates:
    """
    Lane-level rates of the age model: every vehicle of lane i backs off at
    backoff_rates[i] and is served at service_rates[i]. Rates in 1/s.
    """
    backoff_rates: tuple
    service_rates: tuple
    lane_counts: tuple

    def __post_init__(self):
        for name in ('backoff_rates', 'service_rates', 'lane_counts'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        require_same_length(self.backoff_rates, self.service_rates, self.lane_counts)
        for r in self.backoff_rates + self.service_rates:
            require_positive('rate', r)
        if any(n < 0 for n in self.lane_counts) or sum(self.lane_counts) < 1:
            raise DomainError(f'lane counts {self.lane_counts} hold no vehicle')

    @property
    def vehicle_count(self):
        return sum(self.lane_counts)

    def expand(self):
        """Per-vehicle rates, lane by lane, as an age-model instance."""
        from .aoi import ShsInstance
        backoff = np.repeat(np.asarray(self.backoff_rates, dtype=float), self.lane_counts)
        service = np.repeat(np.asarray(self.service_rates, dtype=float), self.lane_counts)
        return ShsInstance(backoff, service)


def transmission_probability(w0):
    if w0 < 1:
        raise DomainError(f'contention window must be at least 1, got {w0}')
    return 2 / (w0 + 1)

def collision_probability(lane, assignment, counts):
    """Probability that some other vehicle transmits in the same slot."""
    require_same_length(assignment, counts)
    require_index('lane', lane, len(counts))
    if counts[lane] < 1:
        raise DomainError(f'lane {lane} holds no vehicle')
    idle = 1.0
    for j, (w, n) in enumerate(zip(assignment, counts)):
        others = n - 1 if j == lane else n
        idle *= (1 - transmission_probability(w)) ** others
    return 1 - idle

def collision_probability_exact(lane, assignment, counts):
    """
    Collision probability by enumerating every transmit/idle outcome of the
    other vehicles in one slot, in exact rational arithmetic. Exponential in
    the number of vehicles; meant for small networks.
    """
    require_same_length(assignment, counts)
    require_index('lane', lane, len(counts))
    if counts[lane] < 1:
        raise DomainError(f'lane {lane} holds no vehicle')
    taus = []
    for j, (w, n) in enumerate(zip(assignment, counts)):
        others = n - 1 if j == lane else n
        taus.extend([Fraction(2, int(w) + 1)] * others)
    collision = Fraction(0)
    for outcome in itertools.product((False, True), repeat=len(taus)):
        if not any(outcome):
            continue
        p = Fraction(1)
        for tau, sends in zip(taus, outcome):
            p *= tau if sends else 1 - tau
        collision += p
    return collision

def min_window_lower_bound(counts, p_up, window_ub=None):
    """
    Smallest common window for which every lane's collision probability stays
    within p_up. Collision probability falls as the window grows, so the
    first passing window is the bound. The search stops at window_ub, by
    default the upper window bound of NetworkParams.
    """
    if window_ub is None:
        window_ub = NetworkParams().window_ub
    if sum(counts) < 1:
        raise DomainError('at least one vehicle is required')
    if not 0 < p_up < 1:
        raise DomainError(f'collision cap must lie in (0, 1), got {p_up}')
    populated = [i for i, n in enumerate(counts) if n >= 1]
    best = None
    for w in range(2, window_ub + 1):
        windows = [w] * len(counts)
        worst = max(collision_probability(i, windows, counts) for i in populated)
        if worst <= p_up:
            return w
        best = worst
    raise InfeasibleError(f'no window up to {window_ub} keeps collisions within {p_up}',
                          best_violation=None if best is None else best - p_up)

def backoff_rate(w0, slot_time):
    """Inverse of the mean back-off time (W0-1)/2 slots."""
    if w0 < 2:
        raise DomainError(f'window {w0} gives no back-off time')
    require_positive('slot time', slot_time)
    return 2 / ((w0 - 1) * slot_time)

def service_rate(tx_time):
    require_positive('transmission time', tx_time)
    return 1 / tx_time

def lane_tx_shares(assignment, counts):
    """Share of the channel each single vehicle of lane i receives."""
    require_same_length(assignment, counts)
    taus = [transmission_probability(w) for w in assignment]
    total = sum(t * n for t, n in zip(taus, counts))
    if total <= 0:
        raise DomainError('no vehicle in the network')
    return [t / total for t in taus]

def per_vehicle_tx_rate(lane, assignment, counts, params):
    """Share of the network rate S*C_bit/N_bit that one vehicle on lane receives."""
    missing = [name for name in ('normalized_throughput', 'channel_bitrate', 'packet_bits')
               if getattr(params, name) is None]
    if missing:
        raise DomainError(f'channel parameters not set: {", ".join(missing)}')
    require_index('lane', lane, len(counts))
    shares = lane_tx_shares(assignment, counts)
    return (params.normalized_throughput * params.channel_bitrate
            / params.packet_bits * shares[lane])

def shs_rates(assignment, counts, params):
    """Back-off and service rates per lane for the given windows and counts."""
    require_same_length(assignment, counts)
    return ShsRates(tuple(backoff_rate(w, params.slot_time) for w in assignment),
                    tuple(service_rate(params.tx_time) for _ in assignment),
                    tuple(counts))
