'''Helpers shared by the subcommands: options, config loading, CSV output'''
import csv
import logging
import os

import click

from semrate.config import load_config
from semrate.exceptions import ConfigError
from semrate.models import init_db

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 2
EXIT_VALIDATION_FAILURE = 3


def config_options(func):
    '''Options every command reading a run configuration takes'''
    options = [
        click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False),
                     help='YAML run configuration.'),
        click.option('--out', 'out_dir', default=None, type=click.Path(file_okay=False),
                     help='Output directory (default: output.dir from the config).'),
        click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), default=None,
                     help='Master seed (overrides the config).'),
        click.option('--db', default=None, type=click.Path(dir_okay=False),
                     help='SQLite results file (overrides output.db).'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def jobs_option(func):
    return click.option('--jobs', type=click.IntRange(1), default=1, show_default=True,
                        help='Worker processes for grid cells.')(func)


def load_or_exit(ctx, config_path):
    '''Loads the config, or reports the failing field and exits with status 2'''
    try:
        return load_config(config_path)
    except ConfigError as e:
        click.echo('config error: {}'.format(e), err=True)
        ctx.exit(EXIT_CONFIG_ERROR)


def resolve_outputs(cfg, out_dir, db):
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    db = db or cfg.db
    if db:
        init_db(db)
    return out_dir, db


def fmt(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, 'item'):
        return fmt(value.item())
    return str(value)


def write_csv(path, columns, rows):
    '''Writes dict rows in column order with deterministic number formatting'''
    with open(path, 'w', encoding='utf-8', newline='') as fout:
        writer = csv.writer(fout, lineterminator='\n')
        writer.writerow(columns)
        count = 0
        for row in rows:
            writer.writerow([fmt(row[c]) for c in columns])
            count += 1
    logger.info('Wrote %d rows to %s', count, path)
    return path
