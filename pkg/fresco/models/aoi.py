'''
Average age of information of vehicle-to-base-station links.

The channel is a continuous-time Markov chain: state 0 is idle, state k means
vehicle k holds the channel. From idle, vehicle k captures the channel at its
back-off rate R_k; a transmission of vehicle k ends at its service rate H_k.
A packet is generated when the channel is captured, so on delivery the
receiver's age of link k drops to the time the packet spent in service.

The closed forms below give per-link and network ages. `markov_oracle`
derives the same ages independently by solving the linear system of the
hybrid system numerically, state by state.

All rates are in 1/s and all ages in s.
'''

import logging
from dataclasses import dataclass

import numpy as np

from .basic_functions import (DomainError, SingularSystemError, require_index,
                              require_positive)

logger = logging.getLogger(__name__)

# Largest number of links the oracle assembles a dense system for.
ORACLE_MAX_LINKS = 12
CONDITION_LIMIT = 1e13

# Reset maps applied to the row vector [x0, x1] (receiver age, packet age).
IDENTITY_RESET = np.eye(2)
DELIVERY_RESET = np.array([[0.0, 0.0],
                           [1.0, 0.0]])


@dataclass(frozen=True)
class AgeResult:
    """
    Attributes:
        per_lane_age (list[float]): Average age of any link on each lane.
        network_age (float): Age averaged over all links.
        normalization (float): 1 + sum of R_k/H_k over all vehicles.
    """
    per_lane_age: list
    network_age: float
    normalization: float


@dataclass(frozen=True)
class ShsInstance:
    """Per-vehicle back-off and service rates."""
    backoff_rates: np.ndarray
    service_rates: np.ndarray

    def __post_init__(self):
        backoff = np.asarray(self.backoff_rates, dtype=float)
        service = np.asarray(self.service_rates, dtype=float)
        if backoff.ndim != 1 or backoff.shape != service.shape or backoff.size < 1:
            raise DomainError('rates must be two equal, non-empty vectors')
        if np.any(backoff <= 0) or np.any(service <= 0):
            raise DomainError('rates must be positive')
        object.__setattr__(self, 'backoff_rates', backoff)
        object.__setattr__(self, 'service_rates', service)

    @property
    def link_count(self):
        return self.backoff_rates.size


def _as_instance(rates):
    return rates if isinstance(rates, ShsInstance) else rates.expand()


def normalization_factor(rates):
    """C(R) = 1 + sum over vehicles of R_k/H_k; accepts ShsRates or ShsInstance."""
    instance = _as_instance(rates)
    return 1 + float(np.sum(instance.backoff_rates / instance.service_rates))

def steady_state_probs(instance):
    """Closed-form occupancy of the idle state followed by each link's state."""
    c = normalization_factor(instance)
    busy = instance.backoff_rates / (c * instance.service_rates)
    return np.concatenate(([1 / c], busy))

def link_age(k, instance):
    """Average age of link k from its own rates and the whole network's load."""
    require_index('link', k, instance.link_count)
    c = normalization_factor(instance)
    load = np.sum(instance.backoff_rates / instance.service_rates**2) / c
    return c / instance.backoff_rates[k] + float(load)

def _lane_load(rates, c):
    return sum(n * r / (c * h**2) for r, h, n in
               zip(rates.backoff_rates, rates.service_rates, rates.lane_counts))

def link_average_age(lane, rates):
    """Average age of any vehicle on lane, from lane-level rates."""
    require_index('lane', lane, len(rates.lane_counts))
    c = normalization_factor(rates)
    return c / rates.backoff_rates[lane] + _lane_load(rates, c)

def network_average_age(rates):
    c = normalization_factor(rates)
    vehicles = rates.vehicle_count
    per_lane = [link_average_age(i, rates) for i in range(len(rates.lane_counts))]
    first = sum(n * c / r for r, n in zip(rates.backoff_rates, rates.lane_counts))
    network = (first + vehicles * _lane_load(rates, c)) / vehicles
    return AgeResult(per_lane, network, c)

def symmetric_age(hs, nv, windows, slot_time, averaged=False):
    """
    Age of a network whose vehicles share one service rate hs and whose
    back-off rates R_k/H_k are large. With averaged=False this is
    (1/hs)(sum_j sum_k R_k/R_j + 1); averaged=True divides the double sum by nv,
    which is the large-load limit of `network_average_age`.
    """
    require_positive('service rate', hs)
    if len(windows) != nv:
        raise DomainError(f'{len(windows)} windows for {nv} vehicles')
    if any(w < 2 for w in windows):
        raise DomainError('every window must be at least 2')
    backoff = 2 / ((np.asarray(windows, dtype=float) - 1) * slot_time)
    ratio_sum = float(np.sum(backoff) * np.sum(1 / backoff))
    if averaged:
        ratio_sum /= nv
    return (ratio_sum + 1) / hs


########## Markov linear-system oracle ##########
def generator_matrix(instance):
    """Generator of the channel chain; state 0 idle, state k+1 is vehicle k."""
    n = instance.link_count
    q = np.zeros((n + 1, n + 1))
    q[0, 1:] = instance.backoff_rates
    q[1:, 0] = instance.service_rates
    q[np.diag_indices(n + 1)] = -q.sum(axis=1)
    return q

def stationary_distribution(instance):
    """Solve the global balance equations numerically."""
    q = generator_matrix(instance)
    size = q.shape[0]
    system = q.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    return np.linalg.solve(system, rhs)

def _transitions(instance, k):
    """(from, to, rate, reset) for every transition, with link k tagged."""
    n = instance.link_count
    transitions = []
    for q in range(1, n + 1):
        transitions.append((0, q, instance.backoff_rates[q - 1], IDENTITY_RESET))
    for q in range(1, n + 1):
        reset = DELIVERY_RESET if q == k + 1 else IDENTITY_RESET
        transitions.append((q, 0, instance.service_rates[q - 1], reset))
    return transitions

def oracle_correlations(instance, k, max_links=ORACLE_MAX_LINKS):
    """
    Solve for the steady-state correlations v_q = [v_q0, v_q1] between each
    discrete state q and the ages of tagged link k. Returns an array of shape
    (states, 2).
    """
    n = instance.link_count
    require_index('link', k, n)
    if n > max_links:
        raise DomainError(f'oracle is limited to {max_links} links, got {n}')

    pi = stationary_distribution(instance)
    transitions = _transitions(instance, k)
    size = 2 * (n + 1)
    matrix = np.zeros((size, size))
    rhs = np.zeros(size)

    out_rate = np.zeros(n + 1)
    for src, _, rate, _ in transitions:
        out_rate[src] += rate
    for q in range(n + 1):
        # receiver age always grows; the packet age grows only while k is served
        growth = np.array([1.0, 1.0 if q == k + 1 else 0.0])
        for c in range(2):
            matrix[2 * q + c, 2 * q + c] += out_rate[q]
            rhs[2 * q + c] = growth[c] * pi[q]
    for src, dst, rate, reset in transitions:
        for c in range(2):
            for c_in in range(2):
                if reset[c_in, c] != 0:
                    matrix[2 * dst + c, 2 * src + c_in] -= rate * reset[c_in, c]

    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularSystemError(f'age system for link {k} is singular '
                                  f'(condition {condition:.3g})', condition)
    if condition > 1e9:
        logger.warning('age system for link %d poorly conditioned: %.3g', k, condition)
    try:
        solution = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularSystemError(f'age system for link {k}: {err}', condition) from err
    return solution.reshape(n + 1, 2)

def markov_oracle(instance, max_links=ORACLE_MAX_LINKS):
    """Per-link average ages: the sum over states of v_q0."""
    return np.array([oracle_correlations(instance, k, max_links)[:, 0].sum()
                     for k in range(instance.link_count)])
