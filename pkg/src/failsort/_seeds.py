"""Deterministic sub-seed derivation for parallel-safe randomness.

Every randomized task derives its own seed from (root seed, task labels), so
results never depend on scheduling or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np


def subseed(seed: int, *labels) -> int:
    """Derive a stable 64-bit sub-seed from a root seed and task labels.

    Uses SHA-256 rather than the builtin hash(), which is salted per process.
    """
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for lab in labels:
        h.update(b"\x1f")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest()[:8], "big")


def rng_for(seed: int, *labels) -> np.random.Generator:
    """A fresh PCG64 generator keyed by (seed, labels)."""
    return np.random.default_rng(subseed(seed, *labels))
