"""
Property suite behind `run_fresco.py verify`. Each check returns whether it
passed and one line of detail. Perturbing a check biases the value it tests,
so that the check must fail; this is the negative control of the suite.
"""
import logging
import math

import numpy as np
from quicktions import Fraction

from . import mopso
from .experiments import Report
from .input_output import Table, VerifyColumn
from .models.aoi import (ShsInstance, link_age, markov_oracle, network_average_age,
                         stationary_distribution, steady_state_probs, symmetric_age)
from .models.dcf import (ShsRates, collision_probability, collision_probability_exact,
                         min_window_lower_bound, transmission_probability)
from .models.fairness import equal_share_windows, fairness_objectives
from .models.geometry import (inter_platoon_spacing, intra_platoon_spacing,
                              max_arrival_rate)
from .parameters import LaneScenario

logger = logging.getLogger(__name__)

PERTURBATION = 0.05
ORACLE_INSTANCES = 200
ORACLE_TOLERANCE = 1e-9


def _bias(value, perturb):
    return value * (1 + PERTURBATION) if perturb else value

def compositions(total, parts, minimum):
    """Integer vectors of the given length and sum with every entry >= minimum."""
    if parts == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(minimum, total - minimum * (parts - 1) + 1):
        for rest in compositions(total - first, parts - 1, minimum):
            yield (first,) + rest

def random_instance(rng, max_links=6, low=0.1, high=1000.0):
    """Rates drawn log-uniformly from [low, high]."""
    n = int(rng.integers(1, max_links + 1))
    log_low, log_high = math.log(low), math.log(high)
    backoff = np.exp(rng.uniform(log_low, log_high, n))
    service = np.exp(rng.uniform(log_low, log_high, n))
    return ShsInstance(backoff, service)

########## Checks ##########
def check_oracle_equivalence(spec, perturb=False):
    rng = np.random.default_rng(spec.seed)
    worst = 0.0
    for _ in range(ORACLE_INSTANCES):
        instance = random_instance(rng)
        closed = np.array([_bias(link_age(k, instance), perturb)
                           for k in range(instance.link_count)])
        oracle = markov_oracle(instance)
        worst = max(worst, float(np.max(np.abs(closed - oracle) / oracle)))
    return worst <= ORACLE_TOLERANCE, f'worst relative error {worst:.3g}'

def check_stationary_distribution(spec, perturb=False):
    rng = np.random.default_rng(spec.seed + 1)
    worst = 0.0
    for _ in range(20):
        instance = random_instance(rng)
        closed = _bias(steady_state_probs(instance), perturb)
        worst = max(worst, float(np.max(np.abs(closed - stationary_distribution(instance)))))
    return worst <= 1e-12, f'worst absolute error {worst:.3g}'

def check_hand_values(spec, perturb=False):
    params = spec.params
    failures = []
    if transmission_probability(128) != 2 / 129:
        failures.append('tau(128)')
    rw = _bias(intra_platoon_spacing(25.0, params), perturb)
    if abs(rw - 58.370) > 1e-3:
        failures.append(f'r_w(25)={rw:.6f}')
    age = _bias(link_age(0, ShsInstance([2.0, 2.0], [1.0, 1.0])), perturb)
    if abs(age - 3.3) > 1e-12:
        failures.append(f'symmetric two-link age {age!r}')
    lam = max_arrival_rate(25.0, params)
    if abs(inter_platoon_spacing(25.0, lam, params) - rw) > 1e-9:
        failures.append('inter spacing at maximum rate')
    return not failures, ', '.join(failures) or 'tau, r_w, two-link age, spacing'

def check_collision_enumeration(spec, perturb=False):
    """Closed-form collision probability against exhaustive enumeration."""
    checked = 0
    for counts in [(1, 1), (2, 3), (4, 4), (5, 5), (3, 3, 4), (10,)]:
        windows = [16 + 8 * i for i in range(len(counts))]
        for lane in range(len(counts)):
            idle = Fraction(1)
            for j, (w, n) in enumerate(zip(windows, counts)):
                idle *= (1 - Fraction(2, w + 1)) ** (n - 1 if j == lane else n)
            closed = 1 - idle
            if perturb:
                closed *= Fraction(1001, 1000)
            if closed != collision_probability_exact(lane, windows, counts):
                return False, f'mismatch for counts {counts} lane {lane}'
            if abs(float(closed) - collision_probability(lane, windows, counts)) > 1e-12:
                return False, f'float form drifts for counts {counts} lane {lane}'
            checked += 1
    return True, f'{checked} lane cases exact'

def check_window_bound(spec, perturb=False):
    params = spec.params
    counts = (4, 4)
    bound = min_window_lower_bound(counts, params.collision_cap, params.window_ub)
    if perturb:
        bound += 1
    windows_ok = all(collision_probability(i, [bound] * 2, counts) <= params.collision_cap
                     for i in range(2))
    below_fails = any(collision_probability(i, [bound - 1] * 2, counts) > params.collision_cap
                      for i in range(2))
    return windows_ok and below_fails, f'lower bound {bound} for counts {counts}'

def check_equal_share_windows(spec, perturb=False):
    params = spec.params
    lanes = [LaneScenario(velocity=v) for v in (21.0, 23.5, 26.5, 29.0)]
    windows = [_bias(w, perturb) for w in equal_share_windows(lanes, params)]
    worst = max(fairness_objectives(lanes, windows, params))
    return worst < 1e-12, f'largest fairness deviation {worst:.3g}'

def check_equal_windows_minimal(spec, perturb=False):
    """The all-equal window vector minimizes the symmetric age at a fixed mean."""
    params = spec.params
    hs = 1 / params.tx_time
    for nv in range(1, 5):
        for mean in range(2, 17):
            equal = _bias(symmetric_age(hs, nv, [mean] * nv, params.slot_time), perturb)
            for windows in compositions(nv * mean, nv, 2):
                if symmetric_age(hs, nv, windows, params.slot_time) < equal - 1e-15:
                    return False, f'{windows} beats the equal vector'
    return True, 'equal windows minimal for every N_v <= 4, mean <= 16'

def check_symmetric_age_bound(spec, perturb=False):
    """Averaged symmetric age against the exact age when back-off rates are large."""
    params = spec.params
    rng = np.random.default_rng(spec.seed + 2)
    hs = 1 / params.tx_time
    worst = 0.0
    for _ in range(50):
        nv = int(rng.integers(1, 9))
        windows = rng.integers(params.window_lb, params.window_ub + 1, nv)
        backoff = 2 / ((windows - 1) * params.slot_time)
        rates = ShsRates(tuple(backoff), (hs,) * nv, (1,) * nv)
        exact = network_average_age(rates).network_age
        approx = symmetric_age(hs, nv, list(windows), params.slot_time, averaged=True)
        bound = 2 * hs / backoff.min() * (PERTURBATION**2 if perturb else 1.0)
        ratio = abs(exact - approx) / exact / bound
        worst = max(worst, ratio)
    return worst <= 1.0, f'largest error relative to the bound {worst:.3g}'

def check_swarm_against_brute_force(spec, perturb=False):
    lanes = spec.lanes
    _, optimum = mopso.run(lanes, spec.params, spec.swarm)
    best, best_score = mopso.brute_force_optimum(lanes, spec.params, spec.swarm.k_bound)
    score = mopso.evaluate(optimum.windows, lanes, spec.params)
    age = _bias(score[-1], perturb)
    gap = age / best_score[-1] - 1
    feasible = bool(np.all(score[:-1] <= spec.swarm.k_bound))
    return feasible and gap <= 0.01, (f'swarm {list(optimum.windows)} vs exhaustive '
                                      f'{list(best.windows)}, age gap {gap:.3%}')


CHECKS = {
    'oracle': check_oracle_equivalence,
    'stationary': check_stationary_distribution,
    'hand-values': check_hand_values,
    'collision': check_collision_enumeration,
    'window-bound': check_window_bound,
    'equal-share': check_equal_share_windows,
    'equal-windows': check_equal_windows_minimal,
    'symmetric-bound': check_symmetric_age_bound,
    'swarm': check_swarm_against_brute_force,
}


def cmd_verify(spec):
    table = Table.from_enum(VerifyColumn)
    report = Report(table)
    for name, check in CHECKS.items():
        try:
            passed, detail = check(spec, perturb=(spec.perturb == name))
        except Exception as err:
            logger.exception('check %s raised', name)
            passed, detail = False, f'{type(err).__name__}: {err}'
        table.add_row(check=name, passed=int(passed), detail=detail)
        report.summary.append(f'{"PASS" if passed else "FAIL"} {name}: {detail}')
        report.passed = report.passed and passed
    return report
