'''V sweeps and load curves

For a fixed (λ, ε) each DPP policy is a family indexed by the control weight
V. Sweeping V over a grid, averaging each point over independent seeds and
keeping the best point whose error rate respects the cap gives the minimum
delay W*(λ, ε) or minimum age Δ*(λ, ε). Repeating over a λ grid gives the
delay-vs-load and age-vs-load tables.
'''
import logging
import math
import multiprocessing
from dataclasses import dataclass
from enum import Enum

import numpy as np

from semrate import sim_engine
from semrate.controllers import PolicyKind
from semrate.error_model import feasible_fixed_actions
from semrate.metrics import ReplicationSummary

logger = logging.getLogger(__name__)

FRONTIER_COLUMNS = ('lambda', 'epsilon', 'policy', 'v', 'objective', 'err_rate', 'err_rate_std',
                    'feasible', 'stable', 'selected')
LOAD_CURVE_COLUMNS = ('lambda', 'epsilon', 'policy', 'objective_kind', 'v', 'objective', 'objective_std',
                      'err_rate', 'err_rate_std', 'mean_n', 'feasible', 'stable')


def default_v_grid():
    '''V = 0 plus 17 log-spaced weights on [1e-2, 1e6]'''
    return [0.0] + [float(v) for v in np.logspace(-2, 6, 17)]


def derive_seed(master_seed, *indices):
    '''Stable 63-bit seed for a grid cell'''
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(i) for i in indices))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


class Objective(Enum):
    DELAY = 'delay'
    AOI = 'aoi'

    def of(self, summary):
        '''(mean, std) of this objective from a ReplicationSummary'''
        return summary.w_little if self is Objective.DELAY else summary.aoi_bar


@dataclass(frozen=True)
class FrontierPoint:
    v: float
    objective: float
    objective_std: float
    err_rate: float
    err_rate_std: float
    mean_n: float
    feasible: bool
    stable: bool
    n_seeds: int


@dataclass(frozen=True)
class FrontierResult:
    points: tuple
    best: FrontierPoint = None

    @property
    def infeasible_all(self):
        return self.best is None

    def rows(self, arrival_rate, epsilon, policy_label):
        for point in self.points:
            yield {
                'lambda': arrival_rate,
                'epsilon': epsilon,
                'policy': policy_label,
                'v': point.v,
                'objective': point.objective,
                'err_rate': point.err_rate,
                'err_rate_std': point.err_rate_std,
                'feasible': point.feasible,
                'stable': point.stable,
                'selected': point is self.best,
            }


@dataclass(frozen=True)
class LoadCurveRow:
    arrival_rate: float
    epsilon: float
    policy: str
    objective_kind: Objective
    point: FrontierPoint
    # a DPP row whose V came out of a feasible sweep
    selected: bool = False

    def row(self):
        return {
            'lambda': self.arrival_rate,
            'epsilon': self.epsilon,
            'policy': self.policy,
            'objective_kind': self.objective_kind.value,
            'v': self.point.v,
            'objective': self.point.objective,
            'objective_std': self.point.objective_std,
            'err_rate': self.point.err_rate,
            'err_rate_std': self.point.err_rate_std,
            'mean_n': self.point.mean_n,
            'feasible': self.point.feasible,
            'stable': self.point.stable,
        }


def is_feasible(summary, epsilon):
    '''Stable and err_mean + err_std / sqrt(#seeds) <= ε'''
    if not summary.stable or summary.n_seeds == 0:
        return False
    mean, std = summary.err_rate
    return mean + std / math.sqrt(summary.n_seeds) <= epsilon


def _run_cell(cell):
    cfg, policy, curve, epsilon = cell
    return sim_engine.run(cfg, policy, curve, epsilon, record_trace=False).metrics


def run_cells(cells, jobs=1):
    '''Runs (cfg, policy, curve, ε) cells; results keep the cell order'''
    cells = list(cells)
    if jobs > 1 and len(cells) > 1:
        with multiprocessing.Pool(processes=jobs) as pool:
            return pool.map(_run_cell, cells)
    return [_run_cell(cell) for cell in cells]


def _point(v, runs, epsilon, objective):
    summary = ReplicationSummary.from_runs(runs)
    obj_mean, obj_std = objective.of(summary)
    err_mean, err_std = summary.err_rate
    return FrontierPoint(
        v=v,
        objective=obj_mean,
        objective_std=obj_std,
        err_rate=err_mean,
        err_rate_std=err_std,
        mean_n=summary.mean_n[0],
        feasible=is_feasible(summary, epsilon),
        stable=summary.stable,
        n_seeds=summary.n_seeds,
    )


def select_best(points):
    '''Lowest objective among feasible points; ties keep the smallest V'''
    best = None
    for point in sorted(points, key=lambda p: p.v):
        if point.feasible and (best is None or point.objective < best.objective):
            best = point
    return best


def evaluate_policy(cfg, policy, curve, epsilon, seeds, objective=Objective.DELAY, jobs=1):
    '''Seed-averaged FrontierPoint of one policy at one (λ, ε, V)'''
    objective = Objective(objective)
    runs = run_cells([(cfg.with_seed(s), policy, curve, epsilon) for s in seeds], jobs=jobs)
    return _point(policy.v, runs, epsilon, objective)


def sweep_v(arrival_rate, epsilon, policy, v_grid, cfg, curve, seeds, objective=None, jobs=1):
    '''Evaluates a DPP policy over ``v_grid`` and picks the best feasible V

    Args:
        arrival_rate(float): λ of every run
        epsilon(float): error cap
        policy(Policy): a dpp-queue or dpp-aoi policy (its own V is ignored)
        v_grid(list): non-negative, ascending weights
        cfg(SimConfig): horizon, warmup and backlog cap; λ and seed are replaced
        curve(ErrorCurve): p_e(N)
        seeds(list): replicate seeds; the seed of each run also mixes in the V index
        objective(Objective): metric to minimize; by default delay for dpp-queue
            and age for dpp-aoi
        jobs(int): worker processes

    Returns:
        FrontierResult: every point ordered by V plus the selected one (None when
        nothing is feasible)

    Raises:
        ValueError: On an empty, negative or unsorted grid, an empty seed list or
            a non-DPP policy
    '''
    v_grid = [float(v) for v in v_grid]
    seeds = list(seeds)
    if not v_grid or any(v < 0 for v in v_grid) or v_grid != sorted(v_grid):
        raise ValueError('V grid must be non-empty, non-negative and ascending')
    if not seeds:
        raise ValueError('at least one seed is required')
    if not policy.is_dpp:
        raise ValueError('sweep_v needs a dpp-queue or dpp-aoi policy, got {}'.format(policy.label))
    if objective is None:
        objective = Objective.AOI if policy.kind is PolicyKind.DPP_AOI else Objective.DELAY
    objective = Objective(objective)

    base = sim_engine.SimConfig(arrival_rate, cfg.horizon, cfg.warmup, cfg.seed,
                                cfg.instability_backlog_cap, cfg.drain)
    cells = []
    for vi, v in enumerate(v_grid):
        pv = policy.with_v(v)
        for s in seeds:
            cells.append((base.with_seed(derive_seed(s, vi)), pv, curve, epsilon))
    runs = run_cells(cells, jobs=jobs)

    n = len(seeds)
    points = tuple(_point(v, runs[vi * n:(vi + 1) * n], epsilon, objective) for vi, v in enumerate(v_grid))
    best = select_best(points)
    if best is None:
        logger.info('lambda=%s eps=%s %s: no feasible V among %d', arrival_rate, epsilon, policy.label, len(points))
    else:
        logger.info('lambda=%s eps=%s %s: selected V=%s (%s %.4g, err %.4f)', arrival_rate, epsilon,
                    policy.label, best.v, objective.value, best.objective, best.err_rate)
    return FrontierResult(points=points, best=best)


def trace_load_curve(lambdas, epsilon, policies, cfg, curve, v_grid=None, objective=Objective.DELAY,
                     master_seed=0, n_seeds=5, jobs=1):
    '''One row per (λ, policy): the best feasible V for DPP policies, a direct run for fixed N

    A DPP policy with no feasible V reports its lowest-error point with
    ``feasible`` false.
    '''
    lambdas = [float(x) for x in lambdas]
    if lambdas != sorted(lambdas):
        raise ValueError('arrival rates must be ascending')
    objective = Objective(objective)
    v_grid = default_v_grid() if v_grid is None else v_grid
    fixed_ok = feasible_fixed_actions(curve, epsilon)
    logger.info('eps=%s: fixed N meeting the cap on the curve alone: %s', epsilon, fixed_ok or 'none')
    rows = []
    for li, lam in enumerate(lambdas):
        if lam * sim_engine.service_time(curve.actions.smallest) >= 1:
            logger.warning('lambda=%s is at or above the capacity 1/%s of the shortest service; '
                           'every policy will be unstable', lam, curve.actions.smallest)
        seeds = [derive_seed(master_seed, li, r) for r in range(n_seeds)]
        lam_cfg = sim_engine.SimConfig(lam, cfg.horizon, cfg.warmup, cfg.seed,
                                       cfg.instability_backlog_cap, cfg.drain)
        for policy in policies:
            if policy.is_dpp:
                result = sweep_v(lam, epsilon, policy, v_grid, lam_cfg, curve, seeds, objective=objective, jobs=jobs)
                point = result.best or min(result.points, key=lambda p: (p.err_rate, p.v))
                selected = result.best is not None
            else:
                point = evaluate_policy(lam_cfg, policy, curve, epsilon, seeds, objective=objective, jobs=jobs)
                selected = False
            rows.append(LoadCurveRow(lam, epsilon, policy.label, objective, point, selected=selected))
    return rows
