"""Counter-based random streams for reproducible, order-independent simulation.

Every consumer of randomness builds its own generator from an integer key
tuple, e.g. ``stream(seed, TAG_OUTCOME, n, rep)``.  The stream for a given
key is a pure function of the key, so replications can run in any order,
on any number of workers, and still produce identical results.
"""

import numpy as np

# Stream purpose tags.  Fixed integers, never reused, so that distinct
# consumers keyed by the same (seed, n, rep) never collide.
TAG_DESIGN = 1
TAG_OUTCOME = 2
TAG_FIELD = 3
TAG_STARTS = 4
TAG_SLICE = 5
TAG_FLOOR = 6
TAG_SYNTHETIC = 7
TAG_MC = 8

_U64 = 1 << 64


def stream(*key):
    """Return a ``numpy.random.Generator`` backed by Philox, keyed by ``key``.

    ``key`` is any tuple of Python ints (negatives allowed; they are mapped
    into the uint64 range).  Identical keys give identical streams.
    """
    if not key:
        raise ValueError("stream key must be non-empty")
    entropy = [int(k) % _U64 for k in key]
    return np.random.Generator(np.random.Philox(seed=np.random.SeedSequence(entropy)))
