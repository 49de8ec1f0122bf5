import hashlib

import numpy as np


__all__ = ["experiment_key", "point_seed"]


def experiment_key(experiment):
    """Stable 64-bit integer derived from an experiment name."""
    if not isinstance(experiment, str) or not experiment:
        raise TypeError(f"Experiment name must be a non-empty string, not {experiment!r}")
    digest = hashlib.blake2b(experiment.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def point_seed(master_seed, experiment, *key):
    """Seed of one sweep point.

    The seed depends only on ``master_seed``, the experiment name and the point's integer ``key``
    (usually the index of the x-value, then the index of the series), so points can be run in any
    order or alone.
    """
    if not isinstance(master_seed, int) or master_seed < 0:
        raise TypeError(f"Master seed must be a non-negative integer, not {master_seed!r}")
    for item in key:
        if not isinstance(item, int) or item < 0:
            raise TypeError(f"Seed key must consist of non-negative integers, not {key!r}")
    sequence = np.random.SeedSequence([master_seed, experiment_key(experiment), *key])
    return int(sequence.generate_state(1, np.uint64)[0]) >> 1
