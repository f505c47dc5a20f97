'''``semrate frontier``: every V point of every DPP sweep'''
import logging
import os

import click

from semrate import frontier
from semrate.commands.common import config_options, jobs_option, load_or_exit, resolve_outputs, write_csv
from semrate.models import DB, FrontierRecord

logger = logging.getLogger(__name__)


@click.command('frontier')
@config_options
@jobs_option
@click.pass_context
def frontier_cmd(ctx, config_path, out_dir, seed, db, jobs):
    '''Sweeps V for each DPP policy at every (epsilon, lambda) and flags the selected point.'''
    cfg = load_or_exit(ctx, config_path)
    out_dir, db = resolve_outputs(cfg, out_dir, db)
    master_seed = cfg.master_seed if seed is None else seed
    policies = [p for p in cfg.policies if p.is_dpp]
    skipped = [p.label for p in cfg.policies if not p.is_dpp]
    if skipped:
        logger.info('frontier ignores fixed policies %s', ', '.join(skipped))

    rows = []
    for epsilon in cfg.epsilons:
        for policy in policies:
            for li, lam in enumerate(cfg.lambdas):
                seeds = [frontier.derive_seed(master_seed, li, r) for r in range(cfg.n_seeds)]
                result = frontier.sweep_v(lam, epsilon, policy, cfg.v_grid, cfg.sim_config(lam), cfg.curve, seeds,
                                          objective=cfg.objective, jobs=jobs)
                rows.extend(result.rows(lam, epsilon, policy.label))

    path = write_csv(os.path.join(out_dir, 'frontier.csv'), frontier.FRONTIER_COLUMNS, rows)
    if db:
        with DB.atomic():
            for row in rows:
                FrontierRecord.create_record(row, cfg.objective.value, replace=True)
    click.echo('wrote {} rows to {}'.format(len(rows), path))
