"""Counter-based splittable random number streams.

Every stochastic routine in the package draws from a stream keyed by
(master seed, purpose tags). Streams are independent Philox counters, so a
run is reproducible under any scheduling of per-unit work.
"""

import hashlib

import numpy as np


def stream(seed, *tags):
    """Return a Generator keyed by the master seed and a tag tuple.

    Tags may be strings or integers; the same (seed, tags) always yields the
    same stream.
    """
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for t in tags:
        h.update(b"/")
        h.update(str(t).encode())
    key = int.from_bytes(h.digest()[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng):
    """Accept a Generator, a seed, or None and return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
