'''Run metrics

Time averages are built by accumulating areas between events: the backlog
Q_sys(t) is piecewise constant, so its area grows by level * dt; the age Δ(t)
grows with unit slope, so its area grows by an exact trapezoid. Delay is
reported both from Little's law (q_bar / λ) and from averaging sojourns.
'''
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

METRICS_COLUMNS = ('lambda', 'epsilon', 'policy', 'v', 'seed', 'q_bar', 'w_little', 'w_direct',
                   'aoi_bar', 'err_rate', 'z_final', 'k_served', 'mean_n', 'stable')


@dataclass
class AreaAccumulator:
    '''Area under a level process from ``origin`` onwards

    Intervals (or the parts of them) before ``origin`` move the clock without
    adding area, which is how the warmup period is excluded.
    '''
    origin: float = 0.0
    last_event_time: float = 0.0
    current_level: float = 0.0
    area: float = 0.0

    def accumulate_backlog(self, t_now, q_now):
        '''Adds previous_level * elapsed, then moves to level ``q_now``

        Raises:
            ValueError: When ``t_now`` is earlier than the last event
        '''
        if t_now < self.last_event_time:
            raise ValueError('time went backwards: {} < {}'.format(t_now, self.last_event_time))
        start = max(self.last_event_time, self.origin)
        if t_now > start:
            self.area += self.current_level * (t_now - start)
        self.last_event_time = t_now
        self.current_level = q_now
        return self

    def accumulate_aoi(self, delta_start, dt):
        '''Adds the trapezoid under an age that starts at ``delta_start`` and grows for ``dt``'''
        if dt < 0:
            raise ValueError('elapsed time must be non-negative, got {}'.format(dt))
        t_end = self.last_event_time + dt
        if t_end > self.origin:
            skipped = max(0.0, self.origin - self.last_event_time)
            low = delta_start + skipped
            span = dt - skipped
            self.area += (low + (low + span)) * span / 2
        self.last_event_time = t_end
        self.current_level = delta_start + dt
        return self


@dataclass
class RunMetrics:
    q_bar: float = 0.0
    w_little: float = 0.0
    w_direct: float = 0.0
    aoi_bar: float = 0.0
    err_rate: float = 0.0
    z_final: float = 0.0
    k_served: int = 0
    lambda_emp: float = 0.0
    mean_n: float = 0.0
    stable: bool = True
    any_success: bool = False
    measured_time: float = 0.0

    @property
    def utilization(self):
        return self.lambda_emp * self.mean_n

    def row(self, arrival_rate, epsilon, policy, seed):
        '''Metrics CSV row with the full parameter tuple echoed'''
        return {
            'lambda': arrival_rate,
            'epsilon': epsilon,
            'policy': policy.label,
            'v': policy.v,
            'seed': seed,
            'q_bar': self.q_bar,
            'w_little': self.w_little,
            'w_direct': self.w_direct,
            'aoi_bar': self.aoi_bar,
            'err_rate': self.err_rate,
            'z_final': self.z_final,
            'k_served': self.k_served,
            'mean_n': self.mean_n,
            'stable': self.stable,
        }


def little_delay(q_bar, lambda_emp):
    '''W = Q / λ

    Raises:
        ValueError: When the arrival rate is not positive
    '''
    if not lambda_emp > 0:
        raise ValueError('Little\'s law needs a positive arrival rate, got {}'.format(lambda_emp))
    return q_bar / lambda_emp


def md1_fixed_delay(arrival_rate, n):
    '''Mean sojourn of an M/D/1 queue with service time ``n`` (Pollaczek-Khinchine)

    Raises:
        ValueError: When ρ = λn >= 1, since no finite delay exists
    '''
    rho = arrival_rate * n
    if rho >= 1:
        raise ValueError('M/D/1 is unstable at rho = {}'.format(rho))
    return n + arrival_rate * n * n / (2 * (1 - rho))


def finalize(backlog, age, ledger, cfg, end_time, z_final, stable, arrivals_in_window):
    '''Reduces accumulators and the ledger to RunMetrics over [warmup, end_time]

    Updates count toward per-update metrics when they depart inside the window,
    whatever their generation time. An empty window yields zeroed metrics.
    '''
    measured = end_time - cfg.warmup
    if measured <= 0:
        return RunMetrics(z_final=z_final, stable=stable)

    served = [r for r in ledger if r.d_k >= cfg.warmup]
    k = len(served)
    lambda_emp = arrivals_in_window / measured
    q_bar = backlog.area / measured
    metrics = RunMetrics(
        q_bar=q_bar,
        w_little=little_delay(q_bar, lambda_emp) if lambda_emp > 0 else 0.0,
        aoi_bar=age.area / measured,
        z_final=z_final,
        k_served=k,
        lambda_emp=lambda_emp,
        stable=stable,
        any_success=any(r.e_k == 0 for r in ledger),
        measured_time=measured,
    )
    if k:
        metrics.w_direct = math.fsum(r.sojourn for r in served) / k
        metrics.err_rate = sum(r.e_k for r in served) / k
        metrics.mean_n = sum(r.n_k for r in served) / k
    return metrics


def fidelity_debt_bound(records, epsilon, z_start=0.0):
    '''Checks (1/K) Σ E_k <= ε + (Z(K) - Z(0)) / K in exact arithmetic

    Z is recomputed over ``records`` with rationals, so the telescoped bound
    holds with no rounding slack.

    Returns:
        tuple: (holds, z_end) where ``z_end`` is the exact final Z as a float
    '''
    eps = Fraction(epsilon)
    z0 = Fraction(z_start)
    z = z0
    errors = 0
    for r in records:
        z = max(z + r.e_k - eps, Fraction(0))
        errors += r.e_k
    k = len(records)
    if k == 0:
        return True, float(z)
    return Fraction(errors, k) <= eps + (z - z0) / k, float(z)


def summarize(values):
    '''(mean, sample standard deviation); a single value has zero spread'''
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return math.nan, math.nan
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def pooled_standard_error(stds, counts):
    '''sqrt(Σ s_i² / n_i) for a difference of independent seed-averaged means'''
    return math.sqrt(sum(s * s / n for s, n in zip(stds, counts) if n > 0))


@dataclass
class ReplicationSummary:
    '''Seed-averaged metrics of one operating point'''
    q_bar: tuple = field(default=(math.nan, math.nan))
    w_little: tuple = field(default=(math.nan, math.nan))
    aoi_bar: tuple = field(default=(math.nan, math.nan))
    err_rate: tuple = field(default=(math.nan, math.nan))
    mean_n: tuple = field(default=(math.nan, math.nan))
    stable: bool = True
    n_seeds: int = 0

    @classmethod
    def from_runs(cls, runs):
        runs = list(runs)
        return cls(
            q_bar=summarize([m.q_bar for m in runs]),
            w_little=summarize([m.w_little for m in runs]),
            aoi_bar=summarize([m.aoi_bar for m in runs]),
            err_rate=summarize([m.err_rate for m in runs]),
            mean_n=summarize([m.mean_n for m in runs]),
            stable=all(m.stable for m in runs),
            n_seeds=len(runs),
        )
