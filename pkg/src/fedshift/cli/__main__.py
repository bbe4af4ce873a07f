import sys

import click

from fedshift.exceptions import (ConfigurationError, CorruptionError, DataError, DivergenceError, IdentityViolation,
                                 OutputError)
from .check import commands as check_group
from .init import commands as init_group
from .inspect import commands as inspect_group
from .run import commands as run_group

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_IO = 3


@click.group()
def cli():
    """FedShift is a simulator for mixed-precision federated learning"""
    pass


cli.add_command(run_group.run)
cli.add_command(check_group.check)
cli.add_command(inspect_group.inspect_payload)
cli.add_command(init_group.init)


def main(argv=None):
    """
    Entry point; returns the process exit code

    0 success, 1 configuration or usage error, 2 divergence or failed identity, 3 I/O error
    """
    try:
        cli.main(args=argv, prog_name='fedshift', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_CONFIG
    except (click.ClickException, click.Abort) as e:
        click.echo(f'error: {e}', err=True)
        return EXIT_CONFIG
    except (ConfigurationError, DataError) as e:
        click.echo(f'configuration error: {e}', err=True)
        return EXIT_CONFIG
    except (DivergenceError, IdentityViolation) as e:
        click.echo(f'run failed: {e}', err=True)
        return EXIT_DIVERGENCE
    except (OutputError, CorruptionError, OSError) as e:
        click.echo(f'i/o error: {e}', err=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
