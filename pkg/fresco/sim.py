"""
Slotted simulator of DCF channel access with a fixed minimum contention
window, used to check the analytic fairness and age models.

Time advances from event to event: all back-off counters run down together
through idle slots, and the vehicles whose counter reaches 0 transmit for
tx_slots slots. A sole transmitter delivers its packet; the receiver's age of
that link drops to tx_slots, the time the packet spent on the air. Several
transmitters collide and each redraws a counter from the same window.
Counters do not move while the channel is busy.

In traversal mode vehicles enter and leave the coverage as their platoons
pass, and packets are counted per complete traversal.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from .models.basic_functions import DomainError
from .models.dcf import WindowAssignment
from .models.geometry import lane_geometry
from .parameters import BackoffMode, CollisionHandling, SimMode

logger = logging.getLogger(__name__)

# Runs shorter than this many transmissions give noisy averages.
MIN_TRANSMISSIONS = 10_000


@dataclass(frozen=True)
class SimResult:
    """
    Attributes:
        per_link_mean_age (list[float]): Time-average age of each link, in s.
            Empty in traversal mode.
        network_mean_age (float | None): Mean of per_link_mean_age.
        per_vehicle_success_count (list[int]), per_vehicle_collision_count (list[int]):
            Per vehicle; in traversal mode per complete traversal.
        empirical_tau (list[float]): Share of a lane's back-off slots in which
            its vehicles attempt.
        channel_busy_fraction (float)
        effective_backoff_rate (list[float]): Attempts per second of time not
            spent transmitting, averaged over each lane's vehicles.
        collision_fraction (float): Share of transmissions that collided.
        packets_per_traversal (list[float]): Mean delivered packets per
            complete traversal on each lane; empty in snapshot mode.
        jain_index (float | None): Jain fairness of packets_per_traversal.
        idle_slots (int), success_count (int), collision_count (int)
        total_slots (int): idle_slots + tx_slots * (successes + collisions).
    """
    per_link_mean_age: list
    network_mean_age: float
    per_vehicle_success_count: list
    per_vehicle_collision_count: list
    empirical_tau: list
    channel_busy_fraction: float
    effective_backoff_rate: list
    collision_fraction: float
    packets_per_traversal: list
    jain_index: float
    idle_slots: int
    success_count: int
    collision_count: int
    total_slots: int


@dataclass
class _Vehicle:
    lane: int
    counter: int
    enter: int = 0
    leave: int = None
    age: float = 0.0
    age_area: float = 0.0
    attempts: int = 0
    successes: int = 0
    collisions: int = 0
    tx_slots: int = 0
    seen_idle: int = 0


def jain_index(values):
    """(sum x)^2 / (n sum x^2); 1 when all values are equal."""
    x = np.asarray(values, dtype=float)
    if x.size == 0 or not np.any(x):
        return None
    return float(x.sum()**2 / (x.size * np.sum(x**2)))

def _age_area(age, start, duration, warmup):
    """Area under a unit-slope age over [start, start+duration] after warmup."""
    end = start + duration
    if end <= warmup:
        return 0.0
    begin = max(start, warmup)
    a0 = age + (begin - start)
    span = end - begin
    return a0 * span + span * span / 2


class DcfSimulator:
    """
    One simulation run. Call `run_snapshot` or `run_traversal` once; the
    configuration fixes every draw.

    Attributes:
        config (SimConfig)
        windows (WindowAssignment)
        rng (numpy.random.Generator)
        vehicles (list[_Vehicle]): Vehicles currently inside the coverage.
        finished (list[_Vehicle]): Vehicles that completed a traversal.
        now (int): Current slot.
    """
    def __init__(self, config):
        self.config = config
        self.windows = WindowAssignment(config.windows)
        self.tx_slots = config.tx_slots
        self.rng = np.random.default_rng(config.seed)
        self.vehicles = []
        self.retired = []
        self.finished = []
        self.now = 0
        self.idle_slots = 0
        self.success_count = 0
        self.collision_count = 0
        self.warmup = 0

    def _draw(self, w0):
        if self.config.backoff_mode is BackoffMode.GEOMETRIC:
            return int(self.rng.geometric(2 / (w0 + 1))) - 1
        return int(self.rng.integers(0, w0))

    def draw_counter(self, lane):
        return self._draw(self.windows[lane])

    def collision_window(self, lane):
        """Window a collided vehicle of `lane` draws its next counter from."""
        if self.config.collision_handling is CollisionHandling.REDRAW_SAME_WINDOW:
            return self.windows[lane]
        raise DomainError(f'unsupported collision handling {self.config.collision_handling}')

    def _elapse(self, slots):
        for vehicle in self.vehicles:
            vehicle.age_area += _age_area(vehicle.age, self.now, slots, self.warmup)
            vehicle.age += slots
        self.now += slots

    def _idle(self, slots):
        self._elapse(slots)
        self.idle_slots += slots
        for vehicle in self.vehicles:
            vehicle.counter -= slots
            vehicle.seen_idle += slots

    def _transmit(self, senders):
        self._elapse(self.tx_slots)
        end = self.now
        collided = len(senders) > 1
        if collided:
            self.collision_count += 1
        else:
            self.success_count += 1
        for vehicle in senders:
            vehicle.attempts += 1
            vehicle.tx_slots += self.tx_slots
            if collided:
                vehicle.collisions += 1
            elif vehicle.leave is None or end <= vehicle.leave:
                vehicle.successes += 1
                vehicle.age = float(self.tx_slots)
            window = (self.collision_window(vehicle.lane) if collided
                      else self.windows[vehicle.lane])
            vehicle.counter = self._draw(window)

    def _contend(self, limit):
        """
        Run idle slots up to `limit` or until some counter reaches 0, then
        the resulting transmission, if any.
        """
        if not self.vehicles:
            self._idle(limit - self.now)
            return
        gap = min(min(v.counter for v in self.vehicles), limit - self.now)
        if gap > 0:
            self._idle(gap)
        senders = [v for v in self.vehicles if v.counter <= 0]
        if senders and self.now < limit:
            self._transmit(senders)

    ########## Snapshot ##########
    def run_snapshot(self):
        self.warmup = self.config.warmup_fraction * self.config.duration_slots
        for lane, count in enumerate(self.config.lane_counts):
            for _ in range(count):
                self.vehicles.append(_Vehicle(lane, self.draw_counter(lane)))
        while self.now < self.config.duration_slots:
            self._contend(self.config.duration_slots)
        return self._result(self.vehicles, snapshot=True)

    ########## Traversal ##########
    def _schedule(self):
        """(enter, leave, lane) for every vehicle that overlaps the run."""
        params = self.config.params
        end_time = self.config.duration_slots * params.slot_time
        schedule = []
        for lane_index, lane in enumerate(self.config.lanes):
            geometry = lane_geometry(lane, params)
            v = lane.velocity
            phase = self.rng.uniform(0, geometry.interval)
            first = -math.ceil((params.coverage + geometry.platoon_length) / geometry.interval) - 1
            k = first
            while True:
                leader = (k * geometry.interval + phase) / v
                if leader > end_time:
                    break
                for j in range(params.platoon_size):
                    enter = leader + j * (params.vehicle_length + geometry.intra_spacing) / v
                    leave = enter + geometry.traversal_time
                    if leave > 0 and enter <= end_time:
                        schedule.append((round(enter / params.slot_time),
                                         round(leave / params.slot_time), lane_index))
                k += 1
        schedule.sort()
        return schedule

    def _apply_population(self, pending):
        while pending and pending[0][0] <= self.now:
            enter, leave, lane = pending.pop(0)
            self.vehicles.append(_Vehicle(lane, self.draw_counter(lane), enter, leave))
        for vehicle in [v for v in self.vehicles if v.leave <= self.now]:
            self.vehicles.remove(vehicle)
            self.retired.append(vehicle)
            if vehicle.enter >= 0:
                self.finished.append(vehicle)

    def run_traversal(self):
        duration = self.config.duration_slots
        self.warmup = self.config.warmup_fraction * duration
        pending = self._schedule()
        # vehicles already in the coverage at the start
        while pending and pending[0][0] <= 0:
            enter, leave, lane = pending.pop(0)
            self.vehicles.append(_Vehicle(lane, self.draw_counter(lane), enter, leave))
        while self.now < duration:
            next_change = min([duration]
                              + ([pending[0][0]] if pending else [])
                              + [v.leave for v in self.vehicles])
            self._contend(next_change)
            self._apply_population(pending)
        return self._result(self.retired + self.vehicles, snapshot=False)

    ########## Result ##########
    def _result(self, population, snapshot):
        params = self.config.params
        lanes = len(self.windows)
        slot = params.slot_time
        measured = self.now - self.warmup

        taus, rates = [], []
        for lane in range(lanes):
            members = [v for v in population if v.lane == lane]
            attempts = sum(v.attempts for v in members)
            idle = sum(v.seen_idle for v in members)
            taus.append(attempts / (attempts + idle) if attempts + idle else 0.0)
            lane_rates = [v.attempts / ((self._residence(v) - v.tx_slots) * slot)
                          for v in members if self._residence(v) > v.tx_slots]
            rates.append(float(np.mean(lane_rates)) if lane_rates else 0.0)

        if snapshot:
            ages = [v.age_area / measured * slot for v in population]
            network_age = float(np.mean(ages))
            counted = population
            packets = []
            fairness = None
        else:
            ages = []
            network_age = None
            counted = self.finished
            packets = []
            for lane in range(lanes):
                done = [v.successes for v in self.finished if v.lane == lane]
                packets.append(float(np.mean(done)) if done else 0.0)
            fairness = jain_index(packets)

        transmissions = self.success_count + self.collision_count
        return SimResult(per_link_mean_age=ages,
                         network_mean_age=network_age,
                         per_vehicle_success_count=[v.successes for v in counted],
                         per_vehicle_collision_count=[v.collisions for v in counted],
                         empirical_tau=taus,
                         channel_busy_fraction=(self.now - self.idle_slots) / self.now,
                         effective_backoff_rate=rates,
                         collision_fraction=(self.collision_count / transmissions
                                             if transmissions else 0.0),
                         packets_per_traversal=packets,
                         jain_index=fairness,
                         idle_slots=self.idle_slots,
                         success_count=self.success_count,
                         collision_count=self.collision_count,
                         total_slots=self.now)

    def _residence(self, vehicle):
        enter = max(vehicle.enter, 0)
        leave = self.now if vehicle.leave is None else min(vehicle.leave, self.now)
        return leave - enter


def _check_duration(config):
    if config.duration_slots < MIN_TRANSMISSIONS * config.tx_slots:
        logger.warning('%d slots cover fewer than %d transmissions of %d slots; '
                       'averages will be noisy', config.duration_slots,
                       MIN_TRANSMISSIONS, config.tx_slots)

def run_snapshot(config):
    _check_duration(config)
    return DcfSimulator(config).run_snapshot()

def run_traversal(config):
    _check_duration(config)
    return DcfSimulator(config).run_traversal()

def simulate(config):
    if config.mode is SimMode.SNAPSHOT:
        return run_snapshot(config)
    return run_traversal(config)
