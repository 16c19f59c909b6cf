"""Seeded random streams.

Every stream is a Philox4x64 counter-based generator keyed by a 64-bit seed
plus a tuple of stream ids, so independent entities (coordinates, demands,
windows, ...) never share draws and adding a new stream cannot perturb the
existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np

STREAMS = {
    "depot": 1,
    "coords": 2,
    "demands": 3,
    "centroids": 4,
    "assign": 5,
    "noise": 6,
    "windows": 7,
    "resample": 8,
    "roles": 9,
    "subsample": 10,
    "sectors": 11,
    "chain": 12,
    "solver": 13,
    "selector": 14,
    "augment": 15,
    "train": 16,
    "init": 17,
    "run": 18,
}


def stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(STREAMS[name], *extra))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(seed: int, *parts) -> int:
    """Stable 63-bit seed from a base seed and arbitrary string/int parts."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for p in parts:
        h.update(b"\x00")
        h.update(str(p).encode())
    return int.from_bytes(h.digest(), "little") >> 1
