'''``semrate simulate``: one run, one metrics row'''
import os

import click

from semrate import sim_engine
from semrate.commands.common import EXIT_CONFIG_ERROR, config_options, load_or_exit, resolve_outputs, write_csv
from semrate.exceptions import ConfigError
from semrate.metrics import METRICS_COLUMNS
from semrate.models import MetricsRecord


@click.command('simulate')
@config_options
@click.option('--trace', is_flag=True, help='Also dump the event trace and the per-update ledger.')
@click.pass_context
def simulate(ctx, config_path, out_dir, seed, db, trace):
    '''Runs a single (lambda, epsilon, policy, V, seed) configuration.'''
    cfg = load_or_exit(ctx, config_path)
    try:
        arrival_rate, epsilon, policy = cfg.single()
    except ConfigError as e:
        click.echo('config error: {}'.format(e), err=True)
        ctx.exit(EXIT_CONFIG_ERROR)
    out_dir, db = resolve_outputs(cfg, out_dir, db)
    seed = cfg.master_seed if seed is None else seed

    result = sim_engine.run(cfg.sim_config(arrival_rate, seed), policy, cfg.curve, epsilon, record_trace=trace)
    row = result.metrics.row(arrival_rate, epsilon, policy, seed)
    write_csv(os.path.join(out_dir, 'metrics.csv'), METRICS_COLUMNS, [row])
    if trace:
        with open(os.path.join(out_dir, 'trace.csv'), 'w', encoding='utf-8', newline='') as fout:
            sim_engine.write_trace_csv(result.trace, fout)
        with open(os.path.join(out_dir, 'ledger.csv'), 'w', encoding='utf-8', newline='') as fout:
            sim_engine.write_ledger_csv(result.records, fout)
    if db:
        MetricsRecord.create_record(arrival_rate, epsilon, policy, seed, result.metrics, replace=True)
    click.echo('{} lambda={} epsilon={} stable={} w={:.4g} aoi={:.4g} err={:.4f}'.format(
        policy.label, arrival_rate, epsilon, result.metrics.stable, result.metrics.w_little,
        result.metrics.aoi_bar, result.metrics.err_rate))
