'''Command line entry point

Every subcommand lives in its own module under :mod:`semrate.commands` and is
registered on the ``main`` group here.
'''
import logging

import click

from semrate.commands import example_config, frontier, simulate, sweep, validate


@click.group()
@click.option('-v', '--verbose', count=True, help='-v for progress, -vv for per-run detail.')
def main(verbose):
    '''Semantic-rate control simulator.'''
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


# Register all commands after here
# =======================
main.add_command(simulate.simulate)
main.add_command(sweep.sweep)
main.add_command(frontier.frontier_cmd)
main.add_command(validate.validate)
main.add_command(example_config.example_config)
