"""Counter-based uniforms keyed by (seed, stream, individual, month).

Every random decision a sampler makes is a pure function of its key, so the
result does not depend on iteration order, sharding or thread count. The
mixing function is the SplitMix64 finaliser (Steele, Lea & Flood 2014).

Key derivation for one draw::

    s = mix(seed ^ stream_key(stream))
    u = mix(mix(s + id_key) + month * GOLDEN) >> 11, scaled to [0, 1)

``id_key`` is a 64-bit BLAKE2b digest of the individual's id, and
``month`` is the month index (``year * 12 + month - 1``); per-individual
draws that are not tied to a month use ``month = -1``.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def stream_key(stream: str) -> int:
    return int.from_bytes(hashlib.blake2b(stream.encode(), digest_size=8).digest(), "little")


def derive_seed(seed: int, index: int) -> int:
    """Child seed number ``index`` of ``seed`` (used for Monte Carlo replications)."""
    return mix64(mix64(seed) ^ mix64((index + 1) * GOLDEN))


def uniforms(seed: int, stream: str, id_keys: np.ndarray, months: np.ndarray | int) -> np.ndarray:
    """Uniform [0, 1) draws, one per (id_key, month) pair, broadcast together."""
    base = mix64((seed & MASK64) ^ stream_key(stream))
    keys = np.asarray(id_keys, dtype=np.uint64)
    m = np.asarray(months, dtype=np.int64).astype(np.uint64)
    with np.errstate(over="ignore"):
        z = _mix_array(keys + np.uint64(base))
        z = _mix_array(z + m * np.uint64(GOLDEN))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
