"""
Parameter records for the scenario, the optimizer, the simulator and the
experiments. Every default belongs to the reference two-lane scenario, so
`NetworkParams()` together with `SwarmConfig()` reproduces it.
"""
from enum import Enum, unique
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


@unique
class InertiaSchedule(Enum):
    CONSTANT = 'constant'
    EXPONENTIAL = 'exponential'


@unique
class GridMode(Enum):
    """
    Resolution of the archive grid. ARCHIVE_SIZE divides each axis into as
    many cells as the archive has members; MESHDIV uses the configured
    mesh_div.
    """
    ARCHIVE_SIZE = 'eq49'
    MESHDIV = 'meshdiv'


@unique
class SimMode(Enum):
    SNAPSHOT = 'snapshot'
    TRAVERSAL = 'traversal'


@unique
class BackoffMode(Enum):
    """
    UNIFORM draws a back-off counter from [0, W0-1]. GEOMETRIC attempts in
    every idle slot with probability 2/(W0+1), which has the same mean but no
    memory.
    """
    UNIFORM = 'uniform'
    GEOMETRIC = 'geometric'


@unique
class CollisionHandling(Enum):
    REDRAW_SAME_WINDOW = 'redraw-same-window'


@unique
class OutputFormat(Enum):
    CSV = 'csv'
    JSON = 'json'


@unique
class Command(Enum):
    OPTIMIZE = 'optimize'
    SWEEP = 'sweep'
    SIMULATE = 'simulate'
    VERIFY = 'verify'
    PARETO = 'pareto'


class NetworkParams(BaseModel):
    """
    Global constants of the roadside scenario. Lengths in m, speeds in m/s,
    durations in s.

    Attributes:
        coverage (float): Coverage length R of the base station.
        lane_count (int): Number of lanes N.
        platoon_size (int): Vehicles per complete platoon.
        vehicle_length (float): Length s of one vehicle.
        min_intra_spacing (float): Spacing r0 at standstill.
        time_headway (float): Time headway Th of the spacing policy.
        v_max (float): Maximum velocity v0; the spacing policy diverges here.
        v_min (float): Minimum allowed velocity.
        slot_time (float): Back-off slot length.
        tx_time (float): Mean successful transmission time Ts.
        window_lb (int), window_ub (int): Bounds on a minimum contention
            window.
        collision_cap (float): Upper bound on per-slot collision probability.
        channel_bitrate (float | None), packet_bits (float | None),
        normalized_throughput (float | None): Optional channel constants,
            only needed for per-vehicle transmission rates.
        v_bar (float), w_bar (int): Target average velocity and window that
            define the network fairness index; w_bar is also the standard
            802.11 window used for comparisons.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    coverage: float = Field(200.0, gt=0)
    lane_count: int = Field(2, ge=1)
    platoon_size: int = Field(2, ge=1)
    vehicle_length: float = Field(5.0, gt=0)
    min_intra_spacing: float = Field(2.0, ge=0)
    time_headway: float = Field(1.6, ge=0)
    v_max: float = Field(30.0, gt=0)
    v_min: float = Field(20.0, gt=0)
    slot_time: float = Field(50e-6, gt=0)
    tx_time: float = Field(8972e-6, gt=0)
    window_lb: int = Field(64, ge=2)
    window_ub: int = Field(256, ge=2)
    collision_cap: float = Field(0.24, gt=0, lt=1)
    channel_bitrate: Optional[float] = Field(None, gt=0)
    packet_bits: Optional[float] = Field(None, gt=0)
    normalized_throughput: Optional[float] = Field(None, gt=0, le=1)
    v_bar: float = Field(25.0, gt=0)
    w_bar: int = Field(128, ge=1)

    @model_validator(mode='after')
    def check_ranges(self):
        if not self.v_min < self.v_max:
            raise ValueError('v_min must be below v_max')
        if self.window_lb > self.window_ub:
            raise ValueError('window_lb must not exceed window_ub')
        if not self.slot_time < self.tx_time:
            raise ValueError('slot_time must be shorter than tx_time')
        return self

    @property
    def tx_slots(self):
        """Transmission time rounded to whole back-off slots (at least 1)."""
        return max(1, round(self.tx_time / self.slot_time))


class LaneScenario(BaseModel):
    """
    Traffic state of one lane: all vehicles share one velocity, and platoons
    arrive at a fraction of the maximum rate that velocity allows.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    velocity: float = Field(gt=0)
    arrival_fraction: float = Field(1.0, gt=0, le=1)


class SwarmConfig(BaseModel):
    """
    Settings of the particle swarm.

    Attributes:
        population (int): Number of particles P.
        iterations (int): Number of swarm steps c.
        inertia (float): Inertia factor; the starting value under the
            exponential schedule.
        cognitive (float), social (float): Acceleration factors c1, c2.
        mesh_div (int): Grid cells per axis under GridMode.MESHDIV.
        alpha (float): Congestion exponent of leader selection.
        k_bound (float): Largest admissible fairness deviation per lane.
        pso_v_min (float), pso_v_max (float): Velocity clamp.
        seed (int): Master seed of the run.
        inertia_schedule (InertiaSchedule)
        inertia_cap (float): Ceiling of the exponential schedule.
        grid_mode (GridMode)
        stochastic_coefficients (bool): Multiply c1 and c2 by fresh uniform
            draws in every update.
        archive_factor (int): Archive capacity as a multiple of population.
        warm_start (bool): Start the first particle at the fair windows
            instead of a random position. Off by default, leaving every
            particle uniformly placed.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    population: int = Field(200, ge=2)
    iterations: int = Field(100, ge=1)
    inertia: float = Field(0.8, ge=0)
    cognitive: float = Field(0.9, ge=0)
    social: float = Field(1.8, ge=0)
    mesh_div: int = Field(10, ge=1)
    alpha: float = Field(3.0, ge=0)
    k_bound: float = Field(0.005, gt=0)
    pso_v_min: float = -1.5
    pso_v_max: float = 1.5
    seed: int = Field(0, ge=0)
    inertia_schedule: InertiaSchedule = InertiaSchedule.CONSTANT
    inertia_cap: float = Field(1.2, gt=0)
    grid_mode: GridMode = GridMode.ARCHIVE_SIZE
    stochastic_coefficients: bool = False
    archive_factor: int = Field(2, ge=1)
    warm_start: bool = False

    @model_validator(mode='after')
    def check_velocity_clamp(self):
        if self.pso_v_min > self.pso_v_max:
            raise ValueError('pso_v_min must not exceed pso_v_max')
        return self


class SimConfig(BaseModel):
    """
    One simulator run. Snapshot runs use `lane_counts`; traversal runs use
    `lanes` and run for `duration_slots` as well.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    mode: SimMode = SimMode.SNAPSHOT
    params: NetworkParams = NetworkParams()
    windows: tuple[int, ...]
    lane_counts: Optional[tuple[int, ...]] = None
    lanes: Optional[tuple[LaneScenario, ...]] = None
    duration_slots: int = Field(2_000_000, ge=1)
    seed: int = Field(0, ge=0)
    collision_handling: CollisionHandling = CollisionHandling.REDRAW_SAME_WINDOW
    backoff_mode: BackoffMode = BackoffMode.UNIFORM
    warmup_fraction: float = Field(0.1, ge=0, lt=1)

    @model_validator(mode='after')
    def check_population(self):
        if any(w < 1 for w in self.windows):
            raise ValueError('windows must be positive')
        if self.mode is SimMode.SNAPSHOT:
            if self.lane_counts is None:
                raise ValueError('snapshot mode needs lane_counts')
            if len(self.lane_counts) != len(self.windows):
                raise ValueError('lane_counts and windows differ in length')
            if any(n < 0 for n in self.lane_counts) or sum(self.lane_counts) < 1:
                raise ValueError('lane_counts must hold at least one vehicle')
        else:
            if self.lanes is None:
                raise ValueError('traversal mode needs lanes')
            if len(self.lanes) != len(self.windows):
                raise ValueError('lanes and windows differ in length')
        return self

    @property
    def tx_slots(self):
        return self.params.tx_slots


class SweepGrid(BaseModel):
    """Average velocities v_bar_min..v_bar_max; lanes sit at v_bar +- gap/2."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    vbar_min: float = 22.0
    vbar_max: float = 27.5
    vbar_step: float = Field(0.5, gt=0)
    gap: float = Field(4.0, ge=0)
    arrival_fractions: tuple[float, ...] = (1.0, 0.75)

    @model_validator(mode='after')
    def check_grid(self):
        if self.vbar_min > self.vbar_max:
            raise ValueError('vbar_min must not exceed vbar_max')
        if any(not 0 < f <= 1 for f in self.arrival_fractions):
            raise ValueError('arrival fractions must lie in (0, 1]')
        return self

    def points(self):
        """Grid of average velocities, computed from the index to avoid drift."""
        count = int(round((self.vbar_max - self.vbar_min) / self.vbar_step)) + 1
        return [round(self.vbar_min + i * self.vbar_step, 10) for i in range(count)
                if self.vbar_min + i * self.vbar_step <= self.vbar_max + 1e-9]


def default_lanes():
    return (LaneScenario(velocity=26.5), LaneScenario(velocity=22.5))


class ExperimentSpec(BaseModel):
    """
    Everything a command needs: the scenario, optimizer and simulator
    settings, the sweep grid and where results go.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    command: Command = Command.OPTIMIZE
    params: NetworkParams = NetworkParams()
    lanes: tuple[LaneScenario, ...] = Field(default_factory=default_lanes)
    swarm: SwarmConfig = SwarmConfig()
    sweep: SweepGrid = SweepGrid()
    sim_slots: int = Field(2_000_000, ge=1)
    sim_backoff: BackoffMode = BackoffMode.UNIFORM
    sim_windows: Optional[tuple[int, ...]] = None
    output: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV
    seed: int = Field(0, ge=0)
    emit_archive: bool = False
    workers: int = Field(1, ge=1)
    perturb: Optional[str] = None

    @model_validator(mode='after')
    def check_scenario(self):
        if len(self.lanes) != self.params.lane_count:
            raise ValueError(f'{len(self.lanes)} lanes given but lane_count is '
                             f'{self.params.lane_count}')
        for i, lane in enumerate(self.lanes):
            if not self.params.v_min <= lane.velocity <= self.params.v_max:
                raise ValueError(f'lane {i} velocity {lane.velocity} outside '
                                 f'[{self.params.v_min}, {self.params.v_max}]')
        if not (self.params.v_min <= self.sweep.vbar_min
                and self.sweep.vbar_max <= self.params.v_max):
            raise ValueError('sweep range must lie within [v_min, v_max]')
        if self.sweep.gap >= self.params.v_max - self.params.v_min:
            raise ValueError('sweep gap leaves no velocity inside the range')
        if self.sim_windows is not None and len(self.sim_windows) != len(self.lanes):
            raise ValueError(f'{len(self.sim_windows)} simulation windows for '
                             f'{len(self.lanes)} lanes')
        return self
