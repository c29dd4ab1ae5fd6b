import csv
import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from enum import Enum, unique

import numpy as np

from .parameters import ExperimentSpec, OutputFormat

SCHEMA_VERSION = 1
SCHEMA_LINE = f'# schema={SCHEMA_VERSION}'


@unique
class SweepColumn(Enum):
    VBAR = 'vbar'
    LANE = 'lane'
    ARRIVAL_FRACTION = 'arrival_fraction'
    VELOCITY = 'velocity'
    W0_OPT = 'w0_opt'
    K_INDEX_OPT = 'k_index_opt'
    K_INDEX_STANDARD = 'k_index_standard'
    K_DEVIATION_OPT = 'k_deviation_opt'
    R_W = 'r_w'
    R_S = 'r_s'
    ARRIVAL_RATE = 'arrival_rate'
    N_I = 'n_i'
    N_V = 'n_v'
    AGE_OPT = 'age_opt'
    AGE_STANDARD = 'age_standard'
    ERROR = 'error'


@unique
class SimColumn(Enum):
    MODE = 'mode'
    ASSIGNMENT = 'assignment'
    LANE = 'lane'
    WINDOW = 'window'
    EMPIRICAL_TAU = 'empirical_tau'
    ANALYTIC_TAU = 'analytic_tau'
    EFFECTIVE_BACKOFF_RATE = 'effective_backoff_rate'
    ANALYTIC_BACKOFF_RATE = 'analytic_backoff_rate'
    MEAN_AGE = 'mean_age'
    ANALYTIC_AGE = 'analytic_age'
    PACKETS_PER_TRAVERSAL = 'packets_per_traversal'


@unique
class OptimizeColumn(Enum):
    LANE = 'lane'
    VELOCITY = 'velocity'
    LANE_VEHICLES = 'lane_vehicles'
    W0_OPT = 'w0_opt'
    K_INDEX = 'k_index'
    K_DEVIATION = 'k_deviation'
    LANE_AGE = 'lane_age'
    NETWORK_AGE = 'network_age'
    ARCHIVE_SIZE = 'archive_size'


@unique
class VerifyColumn(Enum):
    CHECK = 'check'
    PASSED = 'passed'
    DETAIL = 'detail'


def lane_columns(prefix, lane_count):
    return [f'{prefix}_{i + 1}' for i in range(lane_count)]

def pareto_columns(lane_count):
    """f_k_1..f_k_N, f_age, w0_1..w0_N, optimal."""
    return lane_columns('f_k', lane_count) + ['f_age'] \
        + lane_columns('w0', lane_count) + ['optimal']


def _plain(value):
    """numpy scalars to the built-in type of the same value."""
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


@dataclass
class Table:
    """
    Rows of one command's output, keyed by column name.

    Attributes:
        columns (list[str])
        rows (list[dict])
    """
    columns: list
    rows: list = field(default_factory=list)

    @classmethod
    def from_enum(cls, column_enum):
        return cls([c.value for c in column_enum])

    def add_row(self, **values):
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError(f'unknown columns: {", ".join(sorted(unknown))}')
        self.rows.append({c: _plain(values.get(c)) for c in self.columns})

    def column(self, name):
        return [row[name] for row in self.rows]


########## CSV ##########
def _format_cell(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)

def _parse_cell(text):
    if text == '':
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text

def write_table_csv(table, filename):
    """
    Write a table in CSV format, the schema line first, creating the file if
    it doesn't exist and overwriting it if it does.
    """
    with open(filename, 'w', newline='') as csvfile:
        csvfile.write(SCHEMA_LINE + '\n')
        writer = csv.writer(csvfile)
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_format_cell(row[c]) for c in table.columns])

def read_table_csv(filename):
    with open(filename, 'r', newline='') as csvfile:
        first = csvfile.readline().strip()
        if first != SCHEMA_LINE:
            raise ValueError(f'{filename}: expected "{SCHEMA_LINE}", found "{first}"')
        reader = csv.reader(csvfile)
        columns = next(reader)
        table = Table(columns)
        for cells in reader:
            table.rows.append({c: _parse_cell(t) for c, t in zip(columns, cells)})
        return table

########## JSON ##########
def get_serializable(table):
    return {'schema': SCHEMA_VERSION, 'columns': list(table.columns),
            'rows': [dict(row) for row in table.rows]}

def write_table_json(table, filename):
    with open(filename, 'w') as jsonfile:
        json.dump(get_serializable(table), jsonfile, indent=4)

def read_table_json(filename):
    with open(filename, 'r') as jsonfile:
        as_json = json.load(jsonfile)
        if as_json.get('schema') != SCHEMA_VERSION:
            raise ValueError(f'{filename}: unsupported schema {as_json.get("schema")}')
        return Table(as_json['columns'], as_json['rows'])

########## Configuration ##########
def _deep_update(base, overrides):
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_update(merged[key], value)
        else:
            merged[key] = value
    return merged

def load_experiment(filename=None, overrides=None):
    """
    Build an ExperimentSpec from an optional TOML file and command-line
    overrides. Scenario keys sit at the top level of the file next to
    `[[lanes]]`, `[swarm]`, `[sweep]` and `[sim]` tables; a missing
    lane_count is taken from the number of lanes, and the top-level seed also
    seeds the swarm unless `[swarm]` sets its own.

    Raises tomllib.TOMLDecodeError or pydantic.ValidationError.
    """
    raw = {}
    if filename is not None:
        with open(filename, 'rb') as configfile:
            raw = tomllib.load(configfile)
    raw = _deep_update(raw, overrides or {})

    experiment = {}
    for key in ('command', 'lanes', 'swarm', 'sweep', 'output', 'format', 'seed',
                'emit_archive', 'workers', 'perturb'):
        if key in raw:
            experiment[key] = raw.pop(key)
    swarm = experiment.get('swarm', {})
    if 'seed' in experiment and isinstance(swarm, dict):
        experiment['swarm'] = {'seed': experiment['seed'], **swarm}
    sim = raw.pop('sim', {})
    if 'slots' in sim:
        experiment['sim_slots'] = sim.pop('slots')
    if 'backoff' in sim:
        experiment['sim_backoff'] = sim.pop('backoff')
    if 'windows' in sim:
        experiment['sim_windows'] = sim.pop('windows')
    if sim:
        raw['sim'] = sim  # rejected below as unknown

    params = dict(raw.pop('params', {}), **raw)
    if 'lanes' in experiment and 'lane_count' not in params:
        params['lane_count'] = len(experiment['lanes'])
    if params:
        experiment['params'] = params
    return ExperimentSpec.model_validate(experiment)

def write_report(table, spec):
    """Write the table to the output path of the experiment, in its format."""
    if spec.output is None:
        return None
    if spec.format is OutputFormat.JSON:
        write_table_json(table, spec.output)
    else:
        write_table_csv(table, spec.output)
    return spec.output
