import logging
import os

LOG_LEVEL_ENV = 'FEDSHIFT_LOG_LEVEL'
DEFAULT_LOG_LEVEL = logging.INFO


def _env_level():
    level = logging.getLevelName(os.environ.get(LOG_LEVEL_ENV, 'INFO').upper())
    # getLevelName hands back a 'Level X' string for names it does not know
    return level if isinstance(level, int) else DEFAULT_LOG_LEVEL


def get_logger(name):
    logger = logging.getLogger(name)
    level = _env_level()
    logger.setLevel(level)

    # modules call this at import time; attach a single handler per logger
    if not logger.handlers:
        ch = logging.StreamHandler()
        ch.setLevel(level)

        formatter = logging.Formatter('%(name)s - %(levelname)s - %(message)s')
        ch.setFormatter(formatter)

        logger.addHandler(ch)
        logger.propagate = False

    return logger
