"""Per-core-count trace bundles engineered to show one bottleneck class each.

Every recipe describes the *whole* function; the work (record count) is split
evenly across the ``c`` streams of a bundle, like a strong-scaling run.

Recipe summary (KiB/MiB are per-region sizes):

====  =====================================================  ========  =====
class access pattern                                         instr_gap alu
====  =====================================================  ========  =====
1a    pointer chase over a private 64 MiB region per stream  1         1
1b    same chase                                             200       1
1c    uniform random words over 32 MiB split ``c`` ways      200       1
2a    line-stride sweep, private 1.5 MiB region per stream,  4         1
      each line touched twice
2b    word sweep over one shared 64 KiB region, each word    40        1
      touched 4 times, streams start staggered
2c    as 2b                                                  40        32
====  =====================================================  ========  =====
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classify import BottleneckClass
from .generators import chase_order, cyclic_addresses
from .trace import Trace

KiB = 1 << 10
MiB = 1 << 20
CORE_COUNTS = (1, 4, 16, 64, 256)
SCALES = {"tiny": 1 / 64, "small": 1 / 8, "default": 1.0}

TraceBundle = list  # list[Trace], one per emulated core
TraceBundleSet = dict  # dict[int, TraceBundle]


class UnknownClass(ValueError):
    code = "UnknownClass"


@dataclass(frozen=True)
class Recipe:
    records: int
    instr_gap: int
    alu_ops: int
    stream: Callable[..., np.ndarray]  # (stream, cores, n, word_size, rng) -> addresses


def _chase(stream, cores, n, word_size, rng, region=64 * MiB):
    words = region // word_size
    idx = chase_order(words, n, rng).astype(np.uint64)
    return np.uint64(stream * region) + idx * np.uint64(word_size)


def _split_random(stream, cores, n, word_size, rng, total=32 * MiB):
    region = total // cores
    words = region // word_size
    idx = rng.integers(0, words, size=n, dtype=np.uint64)
    return np.uint64(stream * region) + idx * np.uint64(word_size)


def _private_hot(stream, cores, n, word_size, rng, region=3 * MiB // 2, spacing=2 * MiB, line=64):
    return cyclic_addresses(region, n, word_size, base=stream * spacing, stride_bytes=line, repeat=2)


def _shared_hot(stream, cores, n, word_size, rng, region=64 * KiB):
    slots = region // word_size
    return cyclic_addresses(region, n, word_size, repeat=4, offset=stream * slots // cores)


RECIPES: dict[BottleneckClass, Recipe] = {
    BottleneckClass.C1A: Recipe(1 << 18, 1, 1, _chase),
    BottleneckClass.C1B: Recipe(1 << 18, 200, 1, _chase),
    BottleneckClass.C1C: Recipe(1 << 21, 200, 1, _split_random),
    BottleneckClass.C2A: Recipe(1 << 20, 4, 1, _private_hot),
    BottleneckClass.C2B: Recipe(1 << 19, 40, 1, _shared_hot),
    BottleneckClass.C2C: Recipe(1 << 19, 40, 32, _shared_hot),
}


def _as_class(label) -> BottleneckClass:
    try:
        cls = BottleneckClass.parse(label)
    except ValueError:
        raise UnknownClass(f"unknown bottleneck class {label!r}") from None
    if cls not in RECIPES:
        raise UnknownClass(f"no archetype for {label!r}")
    return cls


def gen_archetype(
    class_label,
    scale: str | float = "default",
    seed: int = 0,
    core_counts=CORE_COUNTS,
    word_size: int = 8,
) -> TraceBundleSet:
    """Return ``{c: [trace per stream]}`` for each requested core count."""
    cls = _as_class(class_label)
    recipe = RECIPES[cls]
    factor = SCALES[scale] if isinstance(scale, str) else float(scale)
    total = max(1, int(recipe.records * factor))
    cls_index = list(RECIPES).index(cls)
    out: TraceBundleSet = {}
    for c in sorted(core_counts):
        if c < 1:
            raise ValueError("core counts must be >= 1")
        bundle = []
        for s in range(c):
            n = total // c + (1 if s < total % c else 0)
            n = max(n, 1)
            rng = np.random.default_rng([seed, cls_index, c, s])
            addr = recipe.stream(s, c, n, word_size, rng)
            bundle.append(
                Trace.from_arrays(
                    addr,
                    func_id=cls_index,
                    bb_id=0,
                    alu_ops=recipe.alu_ops,
                    instr_gap=recipe.instr_gap,
                    word_size=word_size,
                    source_label=f"archetype-{cls.value}/c{c}/s{s}",
                )
            )
        out[c] = bundle
    return out
