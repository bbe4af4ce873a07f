"""
Seed derivation

Every random stream in a run is derived by hashing the master seed together with a stream
tag and the indices that identify the stream (round, client id). Streams never depend on
execution order, so running clients in parallel cannot perturb them.
"""
import numpy as np

STREAM_DATA = 0
STREAM_PARTITION = 1
STREAM_INIT = 2
STREAM_SELECT = 3
STREAM_CLIENT = 4


def derive_seed(master_seed, *keys):
    """
    Hash (master_seed, *keys) to a 32-bit integer seed

    :param master_seed: int
    :param keys: ints
    :return: int
    """
    entropy = [int(master_seed)] + [int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def make_rng(seed, *keys):
    entropy = [int(seed)] + [int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
