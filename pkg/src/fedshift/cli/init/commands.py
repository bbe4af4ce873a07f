import os
import shutil
from pathlib import Path

import click

from fedshift.common.paths import CONFIG_DIR, shipped_configs


@click.command(short_help='Copy the shipped configs into a directory')
@click.argument('directory', type=click.Path(file_okay=False), default='.')
def init(directory):
    """Copy the reference configs into DIRECTORY so they can be edited"""
    Path(directory).mkdir(parents=True, exist_ok=True)
    for name in shipped_configs():
        target = os.path.join(directory, name)
        # never clobber an edited config
        if Path(target).is_file():
            click.echo(f'kept existing {target}')
            continue
        shutil.copyfile(os.path.join(CONFIG_DIR, name), target)
        click.echo(f'copied config {target}')
