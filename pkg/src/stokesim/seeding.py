"""Deterministic seed derivation.

One global run seed fans out to per-task seeds through a hash of the
task's label path, so results do not depend on scheduling or on how
many other tasks drew random numbers first.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(root_seed: int, *labels) -> int:
    """Derive a 64-bit seed for the task identified by ``labels``."""
    key = "/".join([str(int(root_seed)), *map(str, labels)])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def spawn_rng(root_seed: int, *labels) -> np.random.Generator:
    """A fresh PCG64 generator keyed by the label path."""
    return np.random.default_rng(child_seed(root_seed, *labels))
