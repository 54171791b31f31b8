"""Deterministic seed derivation: master seed -> stage -> element.

Children are derived through numpy's SeedSequence with an explicit
spawn key, so any stage or element can be reproduced in isolation and
results do not depend on evaluation order or parallelism.
"""

import zlib

import numpy as np


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part)


def derive_rng(master_seed, *parts):
    key = tuple(_key(p) for p in parts)
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=key))
