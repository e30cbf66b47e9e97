"""Deterministic random-stream plumbing.

One master seed drives everything. Child seeds are derived by hashing the
master seed together with a stable string label, so re-running one stage
(say, test-set generation) never perturbs another (crossbar construction).
Python's builtin `hash` is salted per process and must not be used here.
"""

import hashlib

import numpy as np

__all__ = ["derive_seed", "spawn_rng"]

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed, *labels):
    """Mix a master seed and string/int labels into a stable 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(int(master_seed & _MASK64).to_bytes(8, "little"))
    for label in labels:
        if isinstance(label, (int, np.integer)):
            h.update(b"\x00i" + int(label).to_bytes(16, "little", signed=True))
        elif isinstance(label, str):
            h.update(b"\x00s" + label.encode("utf-8"))
        else:
            raise TypeError(f"seed label must be int or str, got {type(label).__name__}")
    return int.from_bytes(h.digest(), "little")


def spawn_rng(master_seed, *labels):
    """A fresh PCG64 generator seeded from (master_seed, labels)."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *labels)))
