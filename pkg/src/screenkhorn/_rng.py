"""Counter-based pseudorandom numbers.

Randomness for the benchmark comes from a keyed counter generator: word i of
the stream for a given seed is mix64(seed + (i+1) * GOLDEN) where mix64 is the
splitmix64 finalizer. There is no hidden state, so any slice of the stream can
be regenerated independently, and a port to another language reproduces the
exact same bits from the same seed.

Uniforms use the top 53 bits of a word and land in the half-open interval
(0, 1], which keeps log(u) finite for the Box-Muller transform below.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_MASK_64 = (1 << 64) - 1


def splitmix64(seed: int, start: int, count: int) -> np.ndarray:
    """Words start .. start+count-1 of the stream keyed by seed, as uint64."""
    if count < 0:
        raise ParameterError(f"count must be nonnegative, got {count}")
    if start < 0:
        raise ParameterError(f"start must be nonnegative, got {start}")
    counters = np.arange(start, start + count, dtype=np.uint64)
    # uint64 arithmetic wraps modulo 2**64, which is exactly what we want
    z = np.uint64(seed & _MASK_64) + (counters + np.uint64(1)) * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """count floats in (0, 1] drawn from stream words start onward."""
    bits = splitmix64(seed, start, count)
    # top 53 bits, shifted into (0, 1]; every value is exactly representable
    return ((bits >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def normals(seed: int, count: int) -> np.ndarray:
    """count standard normal deviates via Box-Muller on word pairs.

    Pair p consumes words 2p and 2p+1 and produces deviates 2p and 2p+1, so
    the mapping from stream position to output position is fixed regardless
    of how many deviates are requested.
    """
    if count < 0:
        raise ParameterError(f"count must be nonnegative, got {count}")
    pairs = (count + 1) // 2
    u = uniforms(seed, 0, 2 * pairs)
    radius = np.sqrt(-2.0 * np.log(u[0::2]))
    angle = (2.0 * np.pi) * u[1::2]
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:count]


def derive_seed(master_seed: int, index: int) -> int:
    """A per-trial seed: one stream word of the master seed, as a Python int.

    Used so each benchmark trial gets its own full 64-bit keyspace while
    remaining a pure function of (master_seed, trial index).
    """
    return int(splitmix64(master_seed, index, 1)[0])
