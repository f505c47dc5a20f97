'''``semrate validate``: oracle and invariant checks on built-in scenarios

Checks:

    - fixed-N runs against the M/D/1 mean sojourn
    - Little's law against direct sojourn averaging on a drained trace
    - the telescoped fidelity-debt bound on a DPP run
    - controller selection against brute-force cost minimization
'''
import logging
from dataclasses import dataclass

import click
import numpy as np

from semrate import frontier, sim_engine
from semrate.commands.common import EXIT_VALIDATION_FAILURE, jobs_option
from semrate.controllers import COSTS, DecisionContext, Policy, PolicyKind, select
from semrate.error_model import ActionSet, ErrorCurve
from semrate.metrics import fidelity_debt_bound, md1_fixed_delay

logger = logging.getLogger(__name__)

# N=10 meets only eps=0.3, N=15 meets eps=0.25, N=20 meets eps=0.2
REFERENCE_ACTIONS = ActionSet((10, 15, 20))
REFERENCE_CURVE = ErrorCurve(REFERENCE_ACTIONS, (0.30, 0.22, 0.18), snr_tag='reference')


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return '[{}] {}: {}'.format('PASS' if self.passed else 'FAIL', self.name, self.detail)


def check_md1(rho, n, horizon=None, warmup=None, n_seeds=5, tolerance=0.02, master_seed=0, jobs=1):
    '''Fixed-N mean sojourn, seed-averaged, within ``tolerance`` of the M/D/1 value

    ``horizon`` defaults to 10^6 service times (10^6 * n time units) and
    ``warmup`` to a tenth of it.
    '''
    horizon = 1e6 * n if horizon is None else horizon
    warmup = 0.1 * horizon if warmup is None else warmup
    arrival_rate = rho / n
    actions = ActionSet((n,))
    curve = ErrorCurve(actions, (0.0,))
    policy = Policy(PolicyKind.FIXED, fixed_n=n)
    cfg = sim_engine.SimConfig(arrival_rate, horizon, warmup)
    seeds = [frontier.derive_seed(master_seed, int(rho * 1000), n, r) for r in range(n_seeds)]
    runs = frontier.run_cells([(cfg.with_seed(s), policy, curve, 0.5) for s in seeds], jobs=jobs)
    simulated = float(np.mean([m.w_direct for m in runs]))
    analytic = md1_fixed_delay(arrival_rate, n)
    rel = abs(simulated - analytic) / analytic
    return CheckResult('md1 rho={} n={}'.format(rho, n), rel <= tolerance,
                       'simulated {:.4f} vs analytic {:.4f} ({:.2%})'.format(simulated, analytic, rel))


def _reference_run(horizon, seed):
    cfg = sim_engine.SimConfig(0.05, horizon, warmup=0.0, seed=seed, drain=True)
    policy = Policy(PolicyKind.DPP_QUEUE, v=10.0)
    return sim_engine.run(cfg, policy, REFERENCE_CURVE, 0.25, record_trace=False)


def check_little(horizon=1e5, seed=0, tolerance=1e-6):
    '''Little's law equals direct sojourn averaging on a trace that ends empty'''
    m = _reference_run(horizon, seed).metrics
    rel = abs(m.w_little - m.w_direct) / m.w_direct
    return CheckResult('little', rel <= tolerance,
                       'w_little {:.6f} vs w_direct {:.6f} (rel {:.2e})'.format(m.w_little, m.w_direct, rel))


def check_fidelity_debt(horizon=1e5, seed=0):
    '''(1/K) Σ E_k <= ε + Z(K)/K, and the run's Z matches the exact recomputation'''
    result = _reference_run(horizon, seed)
    holds, z_exact = fidelity_debt_bound(result.records, 0.25)
    drift = abs(z_exact - result.metrics.z_final)
    k = len(result.records)
    passed = holds and drift <= 1e-9 * max(k, 1)
    return CheckResult('fidelity-debt', passed,
                       'K={} err={:.4f} Z={:.4f} |Z-Z_exact|={:.1e}'.format(
                           k, result.metrics.err_rate, result.metrics.z_final, drift))


def check_argmin(n_contexts=10 ** 5, seed=0):
    '''select() equals brute-force minimization for both DPP rules on random contexts'''
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(n_contexts):
        m = int(rng.integers(1, 9))
        dims = np.sort(rng.choice(np.arange(1, 65), size=m, replace=False))
        actions = ActionSet(tuple(int(n) for n in dims))
        probs = np.sort(rng.random(m))[::-1]
        ctx = DecisionContext(
            q_k=int(rng.integers(1, 1000)),
            z_k=float(rng.exponential(5.0)),
            delta_k=float(rng.exponential(50.0)),
            estimates=dict(zip(actions, (float(p) for p in probs))),
        )
        v = float(10 ** rng.uniform(-2, 4))
        for kind in (PolicyKind.DPP_QUEUE, PolicyKind.DPP_AOI):
            cost = COSTS[kind]
            costs = [cost(n, ctx, v) for n in actions]
            brute = actions.latent_dims[costs.index(min(costs))]
            if select(Policy(kind, v=v), ctx, actions) != brute:
                mismatches += 1
    return CheckResult('argmin', mismatches == 0,
                       '{} contexts x 2 rules, {} mismatches'.format(n_contexts, mismatches))


def run_checks(service_times=1e6, tolerance=0.02, n_seeds=5, jobs=1):
    checks = []
    for n in (10, 20):
        for rho in (0.3, 0.5, 0.7):
            checks.append(check_md1(rho, n, horizon=service_times * n, n_seeds=n_seeds,
                                    tolerance=tolerance, jobs=jobs))
    checks.append(check_little())
    checks.append(check_fidelity_debt())
    checks.append(check_argmin())
    return checks


@click.command('validate')
@jobs_option
@click.option('--horizon', 'service_times', type=click.FloatRange(min=1), default=1e6, show_default=True,
              help='Length of the M/D/1 runs in service times (time units = horizon * n).')
@click.option('--tolerance', type=click.FloatRange(0, 1), default=0.02, show_default=True,
              help='Relative tolerance of the M/D/1 check.')
@click.option('--seeds', 'n_seeds', type=click.IntRange(1), default=5, show_default=True)
@click.pass_context
def validate(ctx, jobs, service_times, tolerance, n_seeds):
    '''Runs the oracle and invariant checks; exits 3 when any fails.'''
    checks = run_checks(service_times=service_times, tolerance=tolerance, n_seeds=n_seeds, jobs=jobs)
    for check in checks:
        click.echo(check.line())
    failed = [c for c in checks if not c.passed]
    if failed:
        logger.warning('%d of %d checks failed', len(failed), len(checks))
        ctx.exit(EXIT_VALIDATION_FAILURE)
