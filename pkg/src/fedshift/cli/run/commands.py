import click

from fedshift.common.paths import resolve_config
from fedshift.experiment.config import load_experiments
from fedshift.experiment.runner import run_variants


@click.command(short_help='Run an experiment config')
@click.option('--config', 'config', required=True, help='Path to a YAML config, or the name of a shipped one')
@click.option('--seed', type=int, default=None, help='Run this seed only')
@click.option('--out', 'out', type=click.Path(file_okay=False), default=None, help='Output directory')
@click.option('--override', 'overrides', multiple=True, metavar='KEY=VALUE',
              help='Set a dotted config key, e.g. local.bits=8. Repeatable')
@click.option('--parallelism', type=click.IntRange(min=1), default=None, help='Client threads per round')
def run(config, seed, out, overrides, parallelism):
    """Run every seed and sweep variant of a config and write records.csv and summary.csv"""
    overrides = list(overrides)
    if seed is not None:
        overrides.append(f'seeds=[{seed}]')
    variants = load_experiments(resolve_config(config), overrides)
    _, summary = run_variants(variants, parallelism=parallelism, output_dir=out)
    for row in summary.itertuples(index=False):
        click.echo(f'{row.variant} seed {row.seed}: final accuracy {row.final_accuracy:.4f}, '
                   f'smoothed {row.smoothed_accuracy:.4f}')
