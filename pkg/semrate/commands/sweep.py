'''``semrate sweep``: delay- or age-vs-load table'''
import logging
import os

import click

from semrate import frontier
from semrate.commands.common import config_options, jobs_option, load_or_exit, resolve_outputs, write_csv
from semrate.models import DB, FrontierRecord

logger = logging.getLogger(__name__)


@click.command('sweep')
@config_options
@jobs_option
@click.pass_context
def sweep(ctx, config_path, out_dir, seed, db, jobs):
    '''One row per (epsilon, policy, lambda): best feasible V for DPP policies, direct runs for fixed N.'''
    cfg = load_or_exit(ctx, config_path)
    out_dir, db = resolve_outputs(cfg, out_dir, db)
    master_seed = cfg.master_seed if seed is None else seed
    base = cfg.sim_config(cfg.lambdas[0])
    logger.info('Sweep: %d epsilon x %d policies x %d lambda, %d V, %d seeds',
                len(cfg.epsilons), len(cfg.policies), len(cfg.lambdas), len(cfg.v_grid), cfg.n_seeds)

    order = {p.label: i for i, p in enumerate(cfg.policies)}
    rows = []
    for epsilon in cfg.epsilons:
        curve_rows = frontier.trace_load_curve(cfg.lambdas, epsilon, cfg.policies, base, cfg.curve,
                                               v_grid=cfg.v_grid, objective=cfg.objective,
                                               master_seed=master_seed, n_seeds=cfg.n_seeds, jobs=jobs)
        rows.extend(sorted(curve_rows, key=lambda r: (order[r.policy], r.arrival_rate)))

    path = write_csv(os.path.join(out_dir, 'load_curve.csv'), frontier.LOAD_CURVE_COLUMNS, [r.row() for r in rows])
    if db:
        with DB.atomic():
            for r in rows:
                FrontierRecord.create_record(dict(r.row(), selected=r.selected), r.objective_kind.value, replace=True)
        logger.info('Stored %d load-curve rows in %s', len(rows), db)
    click.echo('wrote {} rows to {}'.format(len(rows), path))
