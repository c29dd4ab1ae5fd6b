"""
The commands behind run_fresco.py. Every command takes an ExperimentSpec and
returns a Report; writing files and choosing exit codes is left to the caller.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import mopso
from .input_output import (OptimizeColumn, SimColumn, SweepColumn, Table,
                           pareto_columns)
from .models.aoi import link_average_age, network_average_age
from .models.basic_functions import FrescoError
from .models.dcf import (WindowAssignment, backoff_rate, shs_rates,
                         transmission_probability)
from .models.fairness import fairness_report, lane_fairness_index
from .models.geometry import lane_geometries
from .parameters import LaneScenario, SimConfig, SimMode
from .sim import simulate

logger = logging.getLogger(__name__)


@dataclass
class Report:
    """
    Attributes:
        table (Table): Main result of the command.
        extra (dict[str, Table]): Further tables by name, such as the archive.
        passed (bool): False when a check failed.
        summary (list[str]): Lines for the terminal.
    """
    table: Table
    extra: dict = field(default_factory=dict)
    passed: bool = True
    summary: list = field(default_factory=list)


def archive_table(archive, optimum_index, lane_count):
    table = Table(pareto_columns(lane_count))
    for i, (position, objective) in enumerate(zip(archive.positions, archive.objectives)):
        row = {f'f_k_{n + 1}': objective[n] for n in range(lane_count)}
        row['f_age'] = objective[-1]
        row.update({f'w0_{n + 1}': position[n] for n in range(lane_count)})
        row['optimal'] = int(i == optimum_index)
        table.add_row(**row)
    return table

def _optimize(spec, lanes, seed=None):
    swarm = spec.swarm if seed is None else spec.swarm.model_copy(update={'seed': seed})
    archive, optimum = mopso.run(lanes, spec.params, swarm)
    index = mopso.select_optimum(archive, swarm.k_bound)
    return archive, optimum, index

########## optimize ##########
def cmd_optimize(spec):
    params = spec.params
    archive, optimum, index = _optimize(spec, spec.lanes)
    objective = mopso.objective_for(spec.lanes, params)
    rates = shs_rates(optimum, objective.counts, params)
    ages = network_average_age(rates)
    fairness = fairness_report(spec.lanes, optimum, params)

    table = Table.from_enum(OptimizeColumn)
    for i, lane in enumerate(spec.lanes):
        table.add_row(lane=i + 1,
                      velocity=lane.velocity,
                      lane_vehicles=objective.counts[i],
                      w0_opt=optimum[i],
                      k_index=fairness.lane_indices[i],
                      k_deviation=fairness.deviations[i],
                      lane_age=ages.per_lane_age[i],
                      network_age=ages.network_age,
                      archive_size=len(archive))
    report = Report(table)
    if spec.emit_archive:
        report.extra['archive'] = archive_table(archive, index, len(spec.lanes))
    report.summary.append(f'optimal windows {list(optimum.windows)}, '
                          f'age {ages.network_age:.6g} s, archive {len(archive)}')
    return report

########## sweep ##########
def sweep_velocities(vbar, gap, lane_count):
    """Lanes evenly spread over [vbar - gap/2, vbar + gap/2], fastest first."""
    if lane_count == 1:
        return [vbar]
    return [vbar + gap / 2 - i * gap / (lane_count - 1) for i in range(lane_count)]

def sweep_points(spec):
    """(index, vbar, arrival fraction) in output order."""
    points = [(vbar, fraction) for vbar in spec.sweep.points()
              for fraction in spec.sweep.arrival_fractions]
    return [(i, vbar, fraction) for i, (vbar, fraction) in enumerate(points)]

def sweep_point(spec, index, vbar, fraction):
    """Rows of one grid point; a failing point yields error rows."""
    params = spec.params
    velocities = sweep_velocities(vbar, spec.sweep.gap, params.lane_count)
    base = [{'vbar': vbar, 'lane': i + 1, 'arrival_fraction': fraction, 'velocity': v}
            for i, v in enumerate(velocities)]
    try:
        lanes = tuple(LaneScenario(velocity=v, arrival_fraction=fraction)
                      for v in velocities)
        geometries = lane_geometries(lanes, params)
        _, optimum, _ = _optimize(spec, lanes, seed=spec.seed ^ index)
    except (FrescoError, ValueError) as err:
        logger.warning('sweep point vbar=%s fraction=%s failed: %s', vbar, fraction, err)
        return [dict(row, error=str(err)) for row in base]

    counts = [g.lane_vehicles for g in geometries]
    standard = WindowAssignment([params.w_bar] * len(lanes))
    age_opt = network_average_age(shs_rates(optimum, counts, params)).network_age
    age_standard = network_average_age(shs_rates(standard, counts, params)).network_age
    fairness = fairness_report(lanes, optimum, params)
    rows = []
    for i, (row, geometry) in enumerate(zip(base, geometries)):
        rows.append(dict(row,
                         w0_opt=optimum[i],
                         k_index_opt=fairness.lane_indices[i],
                         k_index_standard=lane_fairness_index(lanes[i].velocity,
                                                              params.w_bar,
                                                              params.coverage),
                         k_deviation_opt=fairness.deviations[i],
                         r_w=geometry.intra_spacing,
                         r_s=geometry.inter_spacing,
                         arrival_rate=geometry.arrival_rate,
                         n_i=geometry.lane_vehicles,
                         n_v=sum(counts),
                         age_opt=age_opt,
                         age_standard=age_standard))
    logger.debug('sweep point %d done: windows %s', index, optimum.windows)
    return rows

def _sweep_task(args):
    return sweep_point(*args)

def cmd_sweep(spec):
    tasks = [(spec, i, vbar, fraction) for i, vbar, fraction in sweep_points(spec)]
    logger.info('sweeping %d grid points with %d workers', len(tasks), spec.workers)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as executor:
            results = list(executor.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(task) for task in tasks]

    table = Table.from_enum(SweepColumn)
    failures = 0
    for rows in results:
        for row in rows:
            failures += row.get('error') is not None
            table.add_row(**row)
    report = Report(table)
    report.summary.append(f'{len(tasks)} grid points, {len(table.rows)} rows, '
                          f'{failures} error rows')
    return report

########## simulate ##########
def _sim_rows(table, mode, label, windows, counts, result, spec):
    params = spec.params
    rates = shs_rates(windows, counts, params)
    for i, w in enumerate(windows):
        table.add_row(mode=mode.value,
                      assignment=label,
                      lane=i + 1,
                      window=w,
                      empirical_tau=result.empirical_tau[i],
                      analytic_tau=transmission_probability(w),
                      effective_backoff_rate=result.effective_backoff_rate[i],
                      analytic_backoff_rate=backoff_rate(w, params.slot_time),
                      mean_age=(_lane_mean(result.per_link_mean_age, counts, i)
                                if mode is SimMode.SNAPSHOT else None),
                      analytic_age=link_average_age(i, rates),
                      packets_per_traversal=(result.packets_per_traversal[i]
                                             if mode is SimMode.TRAVERSAL else None))

def _lane_mean(ages, counts, lane):
    start = sum(counts[:lane])
    chunk = ages[start:start + counts[lane]]
    return sum(chunk) / len(chunk) if chunk else None

def cmd_simulate(spec):
    params = spec.params
    lanes = spec.lanes
    counts = mopso.objective_for(lanes, params).counts
    if spec.sim_windows is not None:
        optimal = WindowAssignment.checked(spec.sim_windows, params)
    else:
        _, optimal, _ = _optimize(spec, lanes)
    standard = WindowAssignment([params.w_bar] * len(lanes))

    table = Table.from_enum(SimColumn)
    report = Report(table)
    for label, windows in (('optimal', optimal), ('standard', standard)):
        for mode in SimMode:
            config = SimConfig(mode=mode, params=params, windows=windows.windows,
                               lane_counts=tuple(counts), lanes=tuple(lanes),
                               duration_slots=spec.sim_slots, seed=spec.seed,
                               backoff_mode=spec.sim_backoff)
            result = simulate(config)
            _sim_rows(table, mode, label, windows, counts, result, spec)
            name = f'{label} {list(windows.windows)} {mode.value}'
            if mode is SimMode.SNAPSHOT:
                analytic = network_average_age(shs_rates(windows, counts, params))
                report.summary.append(f'{name}: age {result.network_mean_age:.6g} s, '
                                      f'analytic {analytic.network_age:.6g} s')
            else:
                packets = [round(p, 2) for p in result.packets_per_traversal]
                report.summary.append(f'{name}: packets per traversal {packets}, '
                                      f'jain index {result.jain_index}')
    return report

########## pareto ##########
def cmd_pareto(spec):
    archive, optimum, index = _optimize(spec, spec.lanes)
    table = archive_table(archive, index, len(spec.lanes))
    report = Report(table)
    report.summary.append(f'{len(archive)} non-dominated members, optimum '
                          f'{list(optimum.windows)}')
    return report
