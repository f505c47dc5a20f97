'''``semrate example-config``'''
import click

from semrate.config import EXAMPLE_CONFIG


@click.command('example-config')
@click.argument('path', type=click.Path(dir_okay=False), default='config.example')
def example_config(path):
    '''Writes a documented example configuration to PATH.'''
    with open(path, 'w', encoding='utf-8') as fout:
        fout.write(EXAMPLE_CONFIG)
    click.echo('wrote {}'.format(path))
