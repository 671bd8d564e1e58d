"""Deterministic named RNG substreams.

All randomness in the package flows from a single master seed. Substreams
are derived from (seed, labels) so that parallel consumers and repeated
runs see identical streams regardless of call order.
"""
from __future__ import annotations

import zlib

import numpy as np

DEFAULT_SEED = 0


def substream_sequence(seed: int, *labels: str) -> np.random.SeedSequence:
    """SeedSequence for the named substream of ``seed``."""
    key = tuple(zlib.crc32(lab.encode("utf-8")) for lab in labels)
    return np.random.SeedSequence(entropy=seed, spawn_key=key)


def substream(seed: int, *labels: str) -> np.random.Generator:
    """Generator for the named substream of ``seed``."""
    return np.random.default_rng(substream_sequence(seed, *labels))
