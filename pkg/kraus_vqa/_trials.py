from concurrent.futures import ThreadPoolExecutor

import numpy as np


__all__ = ["trial_generators", "map_trials"]


def trial_generators(rng, trials):
    """Private random streams for ``trials`` Monte-Carlo trials.

    The seeds are drawn from ``rng`` one after the other before any trial runs, so the stream of
    a trial depends only on ``rng`` and its index.
    """
    if not isinstance(rng, np.random.Generator):
        raise TypeError(f"Random stream must be an instance of numpy.random.Generator, "
                        f"not {rng!r}")
    seeds = rng.integers(0, 2 ** 63, size=trials)
    return [np.random.default_rng(int(seed)) for seed in seeds]


def map_trials(fn, generators, threads=1):
    """``[fn(g) for g in generators]``, optionally evaluated on a thread pool.

    Results are returned in trial order regardless of ``threads``.
    """
    if not isinstance(threads, int) or threads < 1:
        raise TypeError(f"Thread count must be a positive integer, not {threads!r}")
    if threads == 1:
        return [fn(generator) for generator in generators]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, generators))
