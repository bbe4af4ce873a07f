import os
import pathlib


_this_dir = pathlib.Path(__file__).parent.absolute()

ROOT_DIR = _this_dir.parent.parent.parent.absolute()

CONFIG_DIR = os.path.join(ROOT_DIR, 'configs')
CONFIG_EXT = '.yml'

SMOKE_CONFIG = os.path.join(CONFIG_DIR, f'smoke{CONFIG_EXT}')
TABLE1_CONFIG = os.path.join(CONFIG_DIR, f'table1_desk{CONFIG_EXT}')
DIRICHLET_CONFIG = os.path.join(CONFIG_DIR, f'dirichlet_desk{CONFIG_EXT}')

PAYLOAD_EXT = '.fsq'
RECORDS_FILE = 'records.csv'
SUMMARY_FILE = 'summary.csv'
PAYLOAD_DIR = 'payloads'


def shipped_configs():
    return sorted(f for f in os.listdir(CONFIG_DIR) if f.endswith(CONFIG_EXT))


def resolve_config(name_or_path):
    """
    Resolve a config argument to a file path

    Accepts a path to a YAML file or the bare name of a shipped config (``smoke``).

    :param name_or_path: str
    :return: str
    """
    if os.path.exists(name_or_path):
        return name_or_path
    shipped = os.path.join(CONFIG_DIR, f'{name_or_path}{CONFIG_EXT}')
    if os.path.exists(shipped):
        return shipped
    return name_or_path
