'''
Access fairness between lanes. A vehicle's data volume over one traversal of
the coverage is proportional to its attempt probability times its traversal
time R/v, so lanes are treated fairly when 2R/(v(W0+1)) is the same on each
of them. The network target uses the configured average velocity and window.
'''

from dataclasses import dataclass

from .basic_functions import DomainError, require_positive, require_same_length


@dataclass(frozen=True)
class FairnessReport:
    """
    Attributes:
        lane_indices (list[float]): Fairness index of each lane.
        network_index (float): Target index of the network.
        deviations (list[float]): Absolute distance of each lane index from
            the target; these are the fairness objectives.
    """
    lane_indices: list
    network_index: float
    deviations: list


def lane_fairness_index(v, w0, coverage):
    require_positive('velocity', v)
    require_positive('coverage', coverage)
    if w0 < 1:
        raise DomainError(f'contention window must be at least 1, got {w0}')
    return 2 * coverage / (v * (w0 + 1))

def network_fairness_index(v_bar, w_bar, coverage):
    return lane_fairness_index(v_bar, w_bar, coverage)

def fairness_report(lanes, windows, params):
    """Fairness indices for real or integer windows, one per lane."""
    require_same_length(lanes, windows)
    target = network_fairness_index(params.v_bar, params.w_bar, params.coverage)
    indices = [lane_fairness_index(lane.velocity, w, params.coverage)
               for lane, w in zip(lanes, windows)]
    return FairnessReport(indices, target, [abs(k - target) for k in indices])

def fairness_objectives(lanes, windows, params):
    return fairness_report(lanes, windows, params).deviations

def equal_share_windows(lanes, params):
    """Real-valued windows with v_i(W_i+1) = v_bar(w_bar+1) on every lane."""
    product = params.v_bar * (params.w_bar + 1)
    return [product / lane.velocity - 1 for lane in lanes]

def fair_window(v, params):
    """Integer window inside the bounds whose lane index is closest to the target."""
    target = network_fairness_index(params.v_bar, params.w_bar, params.coverage)
    return min(range(params.window_lb, params.window_ub + 1),
               key=lambda w: (abs(lane_fairness_index(v, w, params.coverage) - target), w))
