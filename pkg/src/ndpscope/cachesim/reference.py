"""Deliberately naive LRU hierarchy used only as a differential-test oracle.

Each set is a Python list ordered most- to least-recently used. No prefetcher,
no vectorisation, no shared code with the fast engine.
"""
from __future__ import annotations

from typing import Sequence

from ..trace import EmptyTrace, Trace
from .config import ConfigInvalid, HierarchyConfig
from .stats import CacheStats, LevelStats


class _ListCache:
    def __init__(self, sets: int, ways: int):
        self.sets = [[] for _ in range(sets)]
        self.nsets = sets
        self.ways = ways

    def access(self, line: int) -> bool:
        lru = self.sets[line % self.nsets]
        if line in lru:
            lru.remove(line)
            lru.insert(0, line)
            return True
        lru.insert(0, line)
        if len(lru) > self.ways:
            lru.pop()
        return False


def simulate_reference(
    trace: Trace | Sequence[Trace],
    hierarchy: HierarchyConfig,
    interleave_granularity: int = 64,
) -> CacheStats:
    if hierarchy.prefetcher.enabled:
        raise ConfigInvalid("the reference model has no prefetcher")
    streams = [trace] if isinstance(trace, Trace) else list(trace)
    if not streams or all(len(t) == 0 for t in streams):
        raise EmptyTrace("nothing to simulate")
    levels = hierarchy.levels
    n = len(levels)
    line_bytes = hierarchy.line_bytes
    shared_last = n >= 2

    caches = []
    for k, cfg in enumerate(levels):
        if shared_last and k == n - 1:
            one = _ListCache(cfg.sets, cfg.ways)
            caches.append([one] * len(streams))
        else:
            caches.append([_ListCache(cfg.sets, cfg.ways) for _ in streams])

    accesses = [0] * n
    hits = [0] * n
    dram = 0
    bb_misses: dict[int, int] = {}
    instructions = 0
    alu = 0

    records = [list(t) for t in streams]
    cursor = [0] * len(streams)
    remaining = sum(len(r) for r in records)
    while remaining:
        for s, recs in enumerate(records):
            for _ in range(interleave_granularity):
                if cursor[s] >= len(recs):
                    break
                r = recs[cursor[s]]
                cursor[s] += 1
                remaining -= 1
                instructions += r.instr_gap
                alu += r.alu_ops
                line = r.addr // line_bytes
                for k in range(n):
                    accesses[k] += 1
                    if caches[k][s].access(line):
                        hits[k] += 1
                        break
                else:
                    dram += 1
                    bb_misses[r.bb_id] = bb_misses.get(r.bb_id, 0) + 1

    stats = [LevelStats(cfg.name, a, h, a - h) for cfg, a, h in zip(levels, accesses, hits)]
    return CacheStats(
        hierarchy.preset_name.value, stats, dram, instructions, alu, dict(sorted(bb_misses.items())), len(streams)
    )
