"""Deterministic seed derivation.

Every stochastic job (an ensemble, a filter run, a sweep cell, a trial) gets a
64-bit seed mixed from the master seed and a path of keys, so any single job
can be re-run on its own. Mixing is numpy's ``SeedSequence`` hash with the
key path as spawn key; string keys enter via CRC-32.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if part < 0:
        raise ValueError(f"seed keys must be non-negative, got {part}")
    return int(part)


def derive_seed(master_seed: int, *keys: int | str) -> int:
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(_key(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def fresh_seeds(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` distinct 63-bit seeds drawn from ``rng``."""
    seeds = rng.integers(0, 2**63, size=n, dtype=np.int64)
    while len(np.unique(seeds)) < n:
        _, first = np.unique(seeds, return_index=True)
        dup = np.setdiff1d(np.arange(n), first)
        seeds[dup] = rng.integers(0, 2**63, size=len(dup), dtype=np.int64)
    return seeds


def generators(seeds) -> list[np.random.Generator]:
    return [np.random.default_rng(int(s)) for s in seeds]
