"""Seeded pseudorandom bit streams.

All randomness in the package flows through Philox (4x64, 10 rounds), a
published counter-based generator, keyed directly by a 64-bit seed. A
stream is the little-endian bit expansion of the raw 64-bit Philox
output words, so any implementation of Philox can replicate it
bit-exactly. Derived seeds for independent trials are seed + trial
index, which never collides across a run's contiguous seed range.
"""

from __future__ import annotations

import numpy as np


def bit_stream(seed: int, length: int) -> np.ndarray:
    """First `length` bits (uint8) of the Philox stream for `seed`."""
    if length < 0:
        raise ValueError("length must be nonnegative")
    nwords = (length + 63) // 64
    words = np.random.Philox(key=seed).random_raw(nwords)
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")
    return bits[:length]


def generator(seed: int) -> np.random.Generator:
    """A numpy Generator over the same Philox family (for sampling)."""
    return np.random.Generator(np.random.Philox(key=seed))
