'''Event-driven single-server FIFO queue with controller-chosen service times

Updates arrive as a Poisson process. At each service start the policy picks a
latent dimension N_k, the update occupies the server for exactly N_k time units
and departs with a Bernoulli semantic error E_k ~ p_e(N_k). Each departure
advances the virtual queue Z and, on success, resets the age of information.
No update is dropped, preempted or retransmitted.

Initial state: empty system, idle server, Z(0) = 0, Δ(0) = 0.
'''
import csv
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from semrate import metrics
from semrate.controllers import DecisionContext, select
from semrate.error_model import ErrorEstimator, sample_error
from semrate.exceptions import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_BACKLOG_CAP = 10 ** 6
DEFAULT_WARMUP_FRACTION = 0.1
# a backlog that grows by more than this many sqrt(arrivals) over the second
# half of the measurement window counts as unstable
GROWTH_SIGMAS = 4.0
MIN_GROWTH_BACKLOG = 10


@dataclass(frozen=True)
class SimConfig:
    '''Parameters of one simulation run

    ``warmup`` defaults to 10% of the horizon. With ``drain`` set, arrivals
    stop at the horizon and the run continues until the system is empty.

    A run is unstable when the backlog exceeds ``instability_backlog_cap`` (the
    run halts there) or when, at the horizon, the backlog has grown by more than
    max(MIN_GROWTH_BACKLOG, GROWTH_SIGMAS * sqrt(A)) since the midpoint of the
    measurement window, A being the arrivals after that midpoint.
    '''
    arrival_rate: float
    horizon: float
    warmup: float = None
    seed: int = 0
    instability_backlog_cap: int = DEFAULT_BACKLOG_CAP
    drain: bool = False

    def __post_init__(self):
        if self.warmup is None:
            object.__setattr__(self, 'warmup', DEFAULT_WARMUP_FRACTION * self.horizon)
        if not self.arrival_rate > 0:
            raise ConfigError('lambda', 'arrival rate must be positive, got {}'.format(self.arrival_rate))
        if not self.horizon > self.warmup >= 0:
            raise ConfigError('simulation.warmup',
                              'need horizon > warmup >= 0, got horizon={} warmup={}'.format(self.horizon, self.warmup))
        if self.instability_backlog_cap < 1:
            raise ConfigError('simulation.backlog_cap', 'backlog cap must be >= 1')

    def with_seed(self, seed):
        return SimConfig(self.arrival_rate, self.horizon, self.warmup, seed,
                         self.instability_backlog_cap, self.drain)


@dataclass
class SimState:
    clock: float = 0.0
    q_sys: int = 0
    waiting: deque = field(default_factory=deque)
    server_busy: bool = False
    # (g_k, n_k, t_k) of the update being served
    in_service: tuple = None
    z: float = 0.0
    age: float = 0.0


@dataclass(frozen=True)
class UpdateRecord:
    g_k: float
    t_k: float
    d_k: float
    n_k: int
    e_k: int

    @property
    def sojourn(self):
        return self.d_k - self.g_k


class EventKind(Enum):
    ARRIVAL = 'arrival'
    SERVICE_START = 'service_start'
    DEPARTURE = 'departure'


class TraceEvent(NamedTuple):
    time: float
    kind: EventKind
    q_sys: int


@dataclass
class RunResult:
    records: list
    trace: list
    metrics: metrics.RunMetrics


def service_time(n):
    return float(n)


def generate_arrivals(cfg, rng):
    '''Poisson arrival times on [0, horizon]

    Gaps are i.i.d. exponential with mean 1/λ, drawn from ``rng`` in blocks
    whose sizes depend only on ``cfg``, so a seed always gives the same sequence.
    '''
    expected = cfg.arrival_rate * cfg.horizon
    block = int(expected + 4 * math.sqrt(expected)) + 16
    times = []
    last = 0.0
    while True:
        chunk = last + np.cumsum(rng.exponential(1.0 / cfg.arrival_rate, size=block))
        times.append(chunk)
        last = chunk[-1]
        if last > cfg.horizon:
            break
    times = np.concatenate(times)
    return times[times <= cfg.horizon]


def update_virtual_queue(z, e, epsilon):
    return max(z + e - epsilon, 0.0)


def advance_age(age, dt):
    if dt < 0:
        raise ValueError('elapsed time must be non-negative, got {}'.format(dt))
    return age + dt


def reset_age_on_departure(age_before, g_k, d_k, e_k):
    '''Δ(d_k+): d_k - g_k after a successful decode, unchanged after a failure'''
    if e_k == 0:
        return d_k - g_k
    return age_before


class Simulation:
    '''One run of the queue under a policy

    Use :func:`run` unless you need to drive the loop yourself.
    '''

    def __init__(self, cfg, policy, curve, epsilon, arrivals=None, record_trace=True):
        if not 0 <= epsilon < 1:
            raise ValueError('error cap must lie in [0, 1), got {}'.format(epsilon))
        policy.check_actions(curve.actions)
        self.cfg = cfg
        self.policy = policy
        self.curve = curve
        self.epsilon = epsilon
        self.record_trace = record_trace

        arrival_seq, error_seq = np.random.SeedSequence(cfg.seed).spawn(2)
        self.error_rng = np.random.default_rng(error_seq)
        if arrivals is None:
            arrivals = generate_arrivals(cfg, np.random.default_rng(arrival_seq))
        self.arrivals = [float(t) for t in arrivals]

        self.estimator = ErrorEstimator(policy.estimator_mode, curve.actions)
        self.state = SimState()
        self.backlog = metrics.AreaAccumulator(origin=cfg.warmup)
        self.age_area = metrics.AreaAccumulator(origin=cfg.warmup)
        self.records = []
        self.trace = []
        self.arrivals_in_window = 0
        self.midpoint = 0.5 * (cfg.warmup + cfg.horizon)
        self.backlog_at_midpoint = None
        self.arrivals_after_midpoint = 0
        self.arrivals_closed = False
        self.stable = True

    def _log(self, kind):
        if self.record_trace:
            self.trace.append(TraceEvent(self.state.clock, kind, self.state.q_sys))

    def _advance(self, t):
        state = self.state
        dt = t - state.clock
        if self.backlog_at_midpoint is None and t >= self.midpoint:
            self.backlog_at_midpoint = state.q_sys
        self.backlog.accumulate_backlog(t, state.q_sys)
        self.age_area.accumulate_aoi(state.age, dt)
        state.age = advance_age(state.age, dt)
        state.clock = t

    def _start_service(self):
        state = self.state
        g = state.waiting.popleft()
        ctx = DecisionContext(
            q_k=state.q_sys,
            z_k=state.z,
            delta_k=state.age,
            estimates=dict(zip(self.curve.actions, self.estimator.estimates(self.curve))),
        )
        n = select(self.policy, ctx, self.curve.actions)
        state.in_service = (g, n, state.clock)
        state.server_busy = True
        self._log(EventKind.SERVICE_START)

    def _arrive(self):
        state = self.state
        state.q_sys += 1
        state.waiting.append(state.clock)
        if state.clock >= self.cfg.warmup:
            self.arrivals_in_window += 1
        if state.clock >= self.midpoint:
            self.arrivals_after_midpoint += 1
        self.backlog.accumulate_backlog(state.clock, state.q_sys)
        self._log(EventKind.ARRIVAL)
        if state.q_sys > self.cfg.instability_backlog_cap:
            self.stable = False
            logger.warning('Backlog %d exceeded cap %d at t=%.3f (lambda=%s, policy=%s); halting run',
                           state.q_sys, self.cfg.instability_backlog_cap, state.clock,
                           self.cfg.arrival_rate, self.policy.label)
            return
        if not state.server_busy:
            self._start_service()

    def _depart(self):
        state = self.state
        g, n, t_start = state.in_service
        d = state.clock
        e = sample_error(self.curve, n, self.error_rng)
        state.z = update_virtual_queue(state.z, e, self.epsilon)
        state.age = reset_age_on_departure(state.age, g, d, e)
        self.estimator.record_outcome(n, e)
        self.records.append(UpdateRecord(g_k=g, t_k=t_start, d_k=d, n_k=n, e_k=e))

        state.q_sys -= 1
        state.server_busy = False
        state.in_service = None
        self.backlog.accumulate_backlog(d, state.q_sys)
        self.age_area.current_level = state.age
        self._log(EventKind.DEPARTURE)
        if state.waiting:
            self._start_service()

    def _close_arrivals(self):
        '''Brings the clock to the horizon and checks the backlog for linear growth'''
        state = self.state
        self.arrivals_closed = True
        if state.clock < self.cfg.horizon:
            self._advance(self.cfg.horizon)
        growth = state.q_sys - self.backlog_at_midpoint
        threshold = max(MIN_GROWTH_BACKLOG, GROWTH_SIGMAS * math.sqrt(self.arrivals_after_midpoint))
        if growth > threshold:
            self.stable = False
            logger.warning('Backlog grew by %d (limit %.0f) over the second half of the window '
                           '(lambda=%s, policy=%s); marking run unstable',
                           growth, threshold, self.cfg.arrival_rate, self.policy.label)

    def run(self):
        cfg = self.cfg
        state = self.state
        i = 0
        while True:
            next_arrival = self.arrivals[i] if i < len(self.arrivals) else math.inf
            if cfg.drain and next_arrival > cfg.horizon:
                next_arrival = math.inf
            next_departure = math.inf
            if state.server_busy:
                _, n, t_start = state.in_service
                next_departure = t_start + service_time(n)
            # departures first on ties
            if next_departure <= next_arrival:
                t, handler = next_departure, self._depart
            else:
                t, handler = next_arrival, self._arrive
                i += 1
            if t > cfg.horizon and not self.arrivals_closed:
                self._close_arrivals()
                if not self.stable:
                    break
            if t == math.inf or (not cfg.drain and t > cfg.horizon):
                break
            self._advance(t)
            handler()
            if not self.stable:
                break

        # horizon for full runs, last departure for drained ones, halt time otherwise
        end_time = state.clock
        result = metrics.finalize(self.backlog, self.age_area, self.records, cfg, end_time,
                                  z_final=state.z, stable=self.stable,
                                  arrivals_in_window=self.arrivals_in_window)
        logger.debug('Run lambda=%s policy=%s v=%s seed=%s: %d served, stable=%s',
                     cfg.arrival_rate, self.policy.label, self.policy.v, cfg.seed,
                     len(self.records), self.stable)
        return RunResult(self.records, self.trace, result)


def run(cfg, policy, curve, epsilon, arrivals=None, record_trace=True):
    '''Simulates one run

    Args:
        cfg(SimConfig): arrival rate, horizon, warmup, seed and backlog cap
        policy(Policy): latent-dimension selection rule
        curve(ErrorCurve): p_e(N) over the policy's action set
        epsilon(float): long-term error cap feeding the virtual queue
        arrivals(sequence): explicit arrival times; drawn from the seed when omitted
        record_trace(bool): keep the event trace (sweeps turn this off)

    Returns:
        RunResult: ledger of served updates, event trace and metrics

    Raises:
        ValueError: When a fixed policy's N is outside the curve's action set
            or ``epsilon`` is outside [0, 1)
    '''
    return Simulation(cfg, policy, curve, epsilon, arrivals=arrivals, record_trace=record_trace).run()


def write_ledger_csv(records, fout):
    writer = csv.writer(fout, lineterminator='\n')
    writer.writerow(['g', 't_start', 'd', 'n', 'e', 'sojourn'])
    for r in records:
        writer.writerow([repr(r.g_k), repr(r.t_k), repr(r.d_k), r.n_k, r.e_k, repr(r.sojourn)])


def write_trace_csv(trace, fout):
    writer = csv.writer(fout, lineterminator='\n')
    writer.writerow(['time', 'kind', 'q_sys'])
    for event in trace:
        writer.writerow([repr(event.time), event.kind.value, event.q_sys])
