"""Counter-based standard normal draws.

Sample ``s`` (coordinate ``j``) is produced from Philox counter block
``s * blocks_per_sample + j // 4`` under key ``seed``. Any contiguous range
of samples can therefore be generated independently, and the concatenation
of chunks is identical to a single draw of the whole range.
"""
from __future__ import annotations

import numpy as np

from .distributions import std_normal_quantile

_WORDS_PER_BLOCK = 4  # Philox4x64 yields four 64-bit words per counter value
_MASK64 = (1 << 64) - 1


def blocks_per_sample(dim):
    return -(-dim // _WORDS_PER_BLOCK)


def uniform_block(seed, start, count, dim):
    """Uniform draws in the open interval (0, 1), shape ``(count, dim)``."""
    bps = blocks_per_sample(dim)
    gen = np.random.Philox(key=int(seed) & _MASK64)
    if start:
        gen.advance(int(start) * bps)
    raw = gen.random_raw(int(count) * bps * _WORDS_PER_BLOCK)
    raw = raw.reshape(count, bps * _WORDS_PER_BLOCK)[:, :dim]
    # top 53 bits, offset by half an ulp so neither 0 nor 1 can occur
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def standard_normal_block(seed, start, count, dim):
    """Independent N(0, 1) draws for samples ``start .. start+count-1``."""
    if count == 0:
        return np.empty((0, dim))
    return std_normal_quantile(uniform_block(seed, start, count, dim))
