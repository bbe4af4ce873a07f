import click

from fedshift.common.paths import resolve_config
from fedshift.experiment.identities import run_identity_suite


@click.command(short_help='Verify the shift identities')
@click.option('--config', 'config', default='smoke', show_default=True,
              help='Config whose rounds are checked live')
@click.option('--seed', type=int, default=0, show_default=True, help='Seed of the randomized cases')
def check(config, seed):
    """Check the post-shift mean, the divergence identity and the uniform codec bound"""
    results = run_identity_suite(resolve_config(config), seed=seed)
    for name, count in results.items():
        click.echo(f'{name}: {count} ok')
