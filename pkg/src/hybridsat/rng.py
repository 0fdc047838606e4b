"""Counter-based random streams.

Every random draw in the package is addressed by ``(seed, stream, index...)``
rather than by the order in which it happens to be consumed. Outer-loop
iterations therefore get the same randomness whether they run serially, in
chunks, or on different workers.

Two access patterns are provided:

* :func:`generator` returns a :class:`numpy.random.Generator` for one
  addressed cell, e.g. ``generator(seed, "w", i, j)``.
* :func:`block` returns raw 64-bit words for a contiguous range of rows of a
  stream. Row ``i`` always holds the same words regardless of how the range
  is split, because the Philox counter is advanced to the row offset.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["generator", "block", "walk_block", "bits_from_words", "trits_from_words"]


def _tag(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    value = int(part)
    if value < 0:
        raise ValueError(f"stream keys must be non-negative, got {value}")
    return value


def _key(seed: int, path) -> np.ndarray:
    entropy = [_tag(seed)] + [_tag(p) for p in path]
    return np.random.SeedSequence(entropy).generate_state(2, np.uint64)


def generator(seed: int, *path) -> np.random.Generator:
    """Independent generator for the cell ``(seed, *path)``."""
    return np.random.Generator(np.random.Philox(key=_key(seed, path)))


def block(seed: int, stream, start: int, count: int, width: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of a stream, ``width`` words each.

    Rows are padded internally to a multiple of four words (one Philox
    counter step), so row ``i`` depends only on ``(seed, stream, i, width)``.
    """
    if start < 0 or count < 0 or width < 0:
        raise ValueError("start, count and width must be non-negative")
    padded = max(4, -(-width // 4) * 4)
    bitgen = np.random.Philox(key=_key(seed, (stream,)))
    if start:
        bitgen.advance(start * (padded // 4))
    raw = bitgen.random_raw(count * padded)
    return np.asarray(raw, dtype=np.uint64).reshape(count, padded)[:, :width]


def bits_from_words(words: np.ndarray, nbits: int) -> np.ndarray:
    """Unpack the low ``nbits`` bits of each row (64 bits per word)."""
    count = words.shape[0]
    out = np.empty((count, nbits), dtype=np.uint8)
    for k in range(nbits):
        word = words[:, k // 64]
        out[:, k] = ((word >> np.uint64(k % 64)) & np.uint64(1)).astype(np.uint8)
    return out


def trits_from_words(words: np.ndarray) -> np.ndarray:
    """One ternary symbol per word; the modulo bias is below 1e-18."""
    return (words % np.uint64(3)).astype(np.uint8)


def walk_block(seed: int, stream, start: int, count: int, n: int, m: int):
    """Start assignments and walk tapes for iterations ``start .. start+count-1``.

    Returns ``(X0, W)`` with shapes ``(count, n)`` and ``(count, m)``.
    """
    xwords = -(-n // 64)
    words = block(seed, stream, start, count, xwords + m)
    x0 = bits_from_words(words[:, :xwords], n)
    tapes = trits_from_words(words[:, xwords:])
    return x0, tapes
