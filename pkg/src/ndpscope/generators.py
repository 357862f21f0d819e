"""Synthetic trace generators with analytically known locality properties."""
from __future__ import annotations

import numpy as np

from .trace import Overflow, Trace

_ADDR_LIMIT = 1 << 64


def _check_range(start: int, last: int) -> None:
    if start < 0 or last >= _ADDR_LIMIT:
        raise Overflow(f"addresses [{start:#x}, {last:#x}] exceed the 64-bit range")


def gen_sequential(n: int, start: int = 0, stride_words: int = 1, word_size: int = 8, **fields) -> Trace:
    """``n`` reads at ``start + i * stride_words * word_size``."""
    if n < 1 or stride_words < 1:
        raise ValueError("n and stride_words must be >= 1")
    step = stride_words * word_size
    _check_range(start, start + (n - 1) * step)
    addr = np.uint64(start) + np.arange(n, dtype=np.uint64) * np.uint64(step)
    return Trace.from_arrays(addr, word_size=word_size, source_label="sequential", **fields)


def gen_random(n: int, footprint_bytes: int, word_size: int = 8, seed: int = 0, base: int = 0, **fields) -> Trace:
    """Uniform word-aligned addresses over ``[base, base + footprint)``."""
    words = footprint_bytes // word_size
    if n < 1 or words < 1:
        raise ValueError("n >= 1 and a footprint of at least one word required")
    _check_range(base, base + footprint_bytes - 1)
    rng = np.random.default_rng(seed)
    addr = np.uint64(base) + rng.integers(0, words, size=n, dtype=np.uint64) * np.uint64(word_size)
    return Trace.from_arrays(addr, word_size=word_size, source_label="random", **fields)


def gen_single_address(n: int, addr: int = 0, word_size: int = 8, **fields) -> Trace:
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_range(addr, addr)
    return Trace.from_arrays(np.full(n, addr, dtype=np.uint64), word_size=word_size,
                             source_label="single", **fields)


def cyclic_addresses(footprint_bytes: int, n: int, word_size: int = 8, base: int = 0,
                     stride_bytes: int | None = None, repeat: int = 1, offset: int = 0) -> np.ndarray:
    """Addresses of a wrapping sweep; each swept address is emitted ``repeat`` times in a row."""
    stride = word_size if stride_bytes is None else stride_bytes
    if footprint_bytes % stride:
        raise ValueError("footprint must be a multiple of the sweep stride")
    slots = footprint_bytes // stride
    idx = (np.arange(n, dtype=np.int64) // repeat + offset) % slots
    return np.uint64(base) + idx.astype(np.uint64) * np.uint64(stride)


def gen_cyclic(footprint_bytes: int, n: int, word_size: int = 8, base: int = 0, **fields) -> Trace:
    """Sequential word sweep over the footprint, wrapping until ``n`` records."""
    if footprint_bytes % word_size:
        raise ValueError("footprint must be a multiple of word_size")
    _check_range(base, base + footprint_bytes - 1)
    addr = cyclic_addresses(footprint_bytes, n, word_size, base)
    return Trace.from_arrays(addr, word_size=word_size, source_label="cyclic", **fields)


def chase_order(words: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Word indices visited by ``n`` steps around a random single-cycle permutation.

    Visiting the words in the order of a uniform random permutation and then
    wrapping is exactly a walk around a uniform random cyclic permutation. When
    fewer steps than words are needed only the walk's prefix is drawn, as a
    sample without replacement.
    """
    if n < words:
        return rng.choice(words, size=n, replace=False)
    cycle = rng.permutation(words)
    return np.resize(cycle, n)


def gen_pointer_chase(footprint_bytes: int, n: int, word_size: int = 8, seed: int = 0, base: int = 0,
                      **fields) -> Trace:
    words = footprint_bytes // word_size
    if words < 2:
        raise ValueError("pointer chase needs a footprint of at least two words")
    _check_range(base, base + footprint_bytes - 1)
    rng = np.random.default_rng(seed)
    idx = chase_order(words, n, rng).astype(np.uint64)
    addr = np.uint64(base) + idx * np.uint64(word_size)
    return Trace.from_arrays(addr, word_size=word_size, source_label="pointer_chase", **fields)
