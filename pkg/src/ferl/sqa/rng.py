"""SplitMix64 counter-based random streams.

A stream is identified by a 64-bit key. Draw number ``c`` (0-based) of stream
``k`` is ``mix64(k + (c + 1) * GOLDEN)``, i.e. the SplitMix64 sequence seeded
with ``k``. Because every draw is a pure function of ``(key, counter)``, reads
can be generated in any order or in parallel with identical results.

Seeds map to stream keys through ``stream_key(seed) = mix64(seed ^ SALT)``.
Stream splitting: child ``i`` of ``seed`` gets the seed ``draw(stream_key(seed), i) >> 1``,
so read ``r`` of an estimate seeded with ``s`` anneals on ``stream_key(child_seed(s, r))``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
SALT = 0xD1B54A32D192ED03
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def draw(key: int, counter: int) -> int:
    return mix64(key + (counter + 1) * GOLDEN)


def to_unit(x: int) -> float:
    return (x >> 11) * _INV_2_53


def normalize_seed(seed) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seeds must be non-negative, got {seed}")
    return seed & MASK64


def stream_key(seed) -> int:
    return mix64(normalize_seed(seed) ^ SALT)


def child_seed(seed, index: int) -> int:
    # 63 bits so seeds stay representable as signed 64-bit integers in CSV/JSON
    return draw(stream_key(seed), int(index)) >> 1


def derive_seed(seed, *path: int) -> int:
    """Deterministic descendant seed along a path of indices (e.g. episode, step)."""
    s = normalize_seed(seed)
    for p in path:
        s = child_seed(s, p)
    return s


def read_keys(seed, count: int) -> np.ndarray:
    """Stream keys of reads ``0 .. count-1`` of an estimate seeded with ``seed``."""
    return np.array([stream_key(child_seed(seed, r)) for r in range(count)], dtype=np.uint64)


# Vectorised versions used by the numpy fallback kernel.

def mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z.astype(np.uint64, copy=True)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def draw_array(keys: np.ndarray, counter: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        step = np.uint64(((counter + 1) * GOLDEN) & MASK64)
        return mix64_array(keys + step)


def unit_array(x: np.ndarray) -> np.ndarray:
    return (x >> np.uint64(11)).astype(np.float64) * _INV_2_53


def state_seed(seed, values) -> int:
    """Seed that is a pure function of ``seed`` and the exact float bits of ``values``.

    Makes a sampled greedy policy a deterministic function of the state.
    """
    k = stream_key(seed)
    for b in np.ascontiguousarray(values, dtype=np.float64).view(np.uint64).ravel():
        k = mix64(k ^ int(b))
    return k >> 1
