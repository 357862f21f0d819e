"""Trace-driven set-associative LRU hierarchy simulator.

The hot loop is a numba kernel over flat per-level tag/timestamp arrays.
LRU is exact: every touch stamps the way with a global clock and the victim is
the way with the oldest stamp (empty ways carry stamp -1).
"""
from __future__ import annotations

from typing import Sequence

import numba
import numpy as np

from ..trace import EmptyTrace, Trace
from .config import ConfigInvalid, HierarchyConfig
from .stats import CacheStats, LevelStats

DEFAULT_GRANULARITY = 64
_MAX_BB = 1 << 16


class EmptyBundle(ValueError):
    code = "EmptyBundle"


@numba.njit(inline="always")
def _probe(tags, stamps, base, ways, tag, clock):
    """Look up ``tag`` in one set; install it over the LRU way on a miss."""
    victim = base
    oldest = stamps[base]
    for i in range(base, base + ways):
        if tags[i] == tag:
            stamps[i] = clock
            return i, True
        if stamps[i] < oldest:
            oldest = stamps[i]
            victim = i
    tags[victim] = tag
    stamps[victim] = clock
    return victim, False


@numba.njit(inline="always")
def _contains(tags, base, ways, tag):
    for i in range(base, base + ways):
        if tags[i] == tag:
            return True
    return False


@numba.njit(inline="always")
def _set_base(line, inst, sets, ways):
    return (inst * sets + (line & (sets - 1))) * ways


@numba.njit(nogil=True, cache=True)
def _run(
    lines, streams, bbs, n_levels,
    tags0, st0, sets0, ways0, priv0,
    tags1, st1, sets1, ways1, priv1, pf1,
    tags2, st2, sets2, ways2, priv2,
    pf_on, pf_degree, pf_ttag, pf_tstamp, pf_head, pf_dir, pf_sstamp,
    acc, hit, pf_issued, pf_hits, dram, bb_llc,
):
    clock = 0
    n_tab = pf_ttag.shape[1]
    n_str = pf_head.shape[1]
    for i in range(lines.shape[0]):
        line = lines[i]
        s = streams[i]
        clock += 1

        # L1
        acc[0, s] += 1
        base = _set_base(line, s if priv0 else 0, sets0, ways0)
        _, h = _probe(tags0, st0, base, ways0, line, clock)
        if h:
            hit[0, s] += 1
            continue
        if n_levels == 1:
            dram[s] += 1
            bb_llc[bbs[i]] += 1
            continue

        # L2
        acc[1, s] += 1
        inst1 = s if priv1 else 0
        base = _set_base(line, inst1, sets1, ways1)
        way, h = _probe(tags1, st1, base, ways1, line, clock)
        if h:
            hit[1, s] += 1
            if pf1[way]:
                pf_hits[s] += 1
                pf1[way] = 0
        else:
            pf1[way] = 0
            if n_levels == 2:
                dram[s] += 1
                bb_llc[bbs[i]] += 1
            else:
                acc[2, s] += 1
                base3 = _set_base(line, s if priv2 else 0, sets2, ways2)
                _, h3 = _probe(tags2, st2, base3, ways2, line, clock)
                if h3:
                    hit[2, s] += 1
                else:
                    dram[s] += 1
                    bb_llc[bbs[i]] += 1

        if not pf_on:
            continue

        # stream prefetcher, trained on L1 miss lines, fills into L2
        direction = 0
        start = line
        for j in range(n_str):
            d = pf_dir[s, j]
            if d != 0:
                ahead = (line - pf_head[s, j]) * d
                if 0 < ahead <= pf_degree:
                    pf_head[s, j] = line
                    pf_sstamp[s, j] = clock
                    direction = d
                    break
        if direction == 0:
            found = -1
            for t in range(n_tab):
                if pf_ttag[s, t] == line - 1:
                    direction = 1
                    found = t
                    break
                if pf_ttag[s, t] == line + 1:
                    direction = -1
                    found = t
                    break
            if direction != 0:
                pf_ttag[s, found] = -1
                pf_tstamp[s, found] = -1
                victim = 0
                for j in range(1, n_str):
                    if pf_sstamp[s, j] < pf_sstamp[s, victim]:
                        victim = j
                pf_head[s, victim] = line
                pf_dir[s, victim] = direction
                pf_sstamp[s, victim] = clock
            else:
                victim = 0
                for t in range(1, n_tab):
                    if pf_tstamp[s, t] < pf_tstamp[s, victim]:
                        victim = t
                pf_ttag[s, victim] = line
                pf_tstamp[s, victim] = clock
                continue
        for k in range(1, pf_degree + 1):
            pl = start + direction * k
            if pl < 0:
                break
            base = _set_base(pl, inst1, sets1, ways1)
            if _contains(tags1, base, ways1, pl):
                continue
            clock += 1
            way, _ = _probe(tags1, st1, base, ways1, pl, clock)
            pf1[way] = 1
            pf_issued[s] += 1
            if n_levels == 2:
                dram[s] += 1
            else:
                base3 = _set_base(pl, s if priv2 else 0, sets2, ways2)
                _, h3 = _probe(tags2, st2, base3, ways2, pl, clock)
                if not h3:
                    dram[s] += 1


def interleave_order(lengths: Sequence[int], granularity: int) -> tuple[np.ndarray, np.ndarray]:
    """Round-robin deal of ``granularity``-record blocks across streams.

    Returns ``(stream_of, index_within_stream)`` for the global processing order.
    """
    if granularity < 1:
        raise ValueError("interleave granularity must be >= 1")
    streams = np.concatenate([np.full(n, s, dtype=np.int64) for s, n in enumerate(lengths)])
    local = np.concatenate([np.arange(n, dtype=np.int64) for n in lengths])
    order = np.lexsort((streams, local // granularity))
    return streams[order], local[order]


def _level_arrays(cfg, instances):
    n = instances * cfg.sets * cfg.ways
    return np.full(n, -1, dtype=np.int64), np.full(n, -1, dtype=np.int64)


def simulate_multicore(
    bundle: Sequence[Trace],
    hierarchy: HierarchyConfig,
    interleave_granularity: int = DEFAULT_GRANULARITY,
) -> CacheStats:
    """Simulate one stream per emulated core.

    Every level but the last is private per stream; with two or more levels the
    last one is a single shared instance. A one-level hierarchy (NDP) is fully
    private and every L1 miss goes to DRAM.
    """
    bundle = list(bundle)
    if not bundle:
        raise EmptyBundle("bundle holds no streams")
    if sum(len(t) for t in bundle) == 0:
        raise EmptyTrace("bundle holds no records")
    if not isinstance(hierarchy, HierarchyConfig):
        raise ConfigInvalid("hierarchy must be a HierarchyConfig")

    S = len(bundle)
    lv = hierarchy.levels
    nl = len(lv)
    shift = np.uint64(hierarchy.line_bytes.bit_length() - 1)
    stream_of, local = interleave_order([len(t) for t in bundle], interleave_granularity)
    all_lines = [(t.addresses >> shift).astype(np.int64) for t in bundle]
    all_bbs = [t.records["bb_id"].astype(np.int64) for t in bundle]
    offsets = np.cumsum([0] + [len(t) for t in bundle])[:-1]
    flat_idx = offsets[stream_of] + local
    lines = np.concatenate(all_lines)[flat_idx]
    bbs = np.concatenate(all_bbs)[flat_idx]

    shared_last = nl >= 2
    priv = [True] * nl
    if shared_last:
        priv[-1] = False
    arrays = []
    for k in range(3):
        if k < nl:
            tags, st = _level_arrays(lv[k], S if priv[k] else 1)
            arrays.append((tags, st, lv[k].sets, lv[k].ways, priv[k]))
        else:
            arrays.append((np.full(1, -1, np.int64), np.full(1, -1, np.int64), 1, 1, True))
    pf1 = np.zeros(arrays[1][0].shape[0], dtype=np.uint8)

    pf = hierarchy.prefetcher
    T = max(pf.table_entries, 1)
    NS = max(pf.stream_count, 1)
    pf_ttag = np.full((S, T), -(1 << 62), dtype=np.int64)
    pf_tstamp = np.full((S, T), -1, dtype=np.int64)
    pf_head = np.zeros((S, NS), dtype=np.int64)
    pf_dir = np.zeros((S, NS), dtype=np.int64)
    pf_sstamp = np.full((S, NS), -1, dtype=np.int64)

    acc = np.zeros((3, S), dtype=np.int64)
    hit = np.zeros((3, S), dtype=np.int64)
    pf_issued = np.zeros(S, dtype=np.int64)
    pf_hits = np.zeros(S, dtype=np.int64)
    dram = np.zeros(S, dtype=np.int64)
    bb_llc = np.zeros(_MAX_BB, dtype=np.int64)

    (t0, s0, n0, w0, p0), (t1, s1, n1, w1, p1), (t2, s2, n2, w2, p2) = arrays
    _run(
        lines, stream_of, bbs, nl,
        t0, s0, n0, w0, p0,
        t1, s1, n1, w1, p1, pf1,
        t2, s2, n2, w2, p2,
        bool(pf.enabled), int(pf.degree), pf_ttag, pf_tstamp, pf_head, pf_dir, pf_sstamp,
        acc, hit, pf_issued, pf_hits, dram, bb_llc,
    )

    def build(sel, instr, alu, bb_map, cores):
        levels = []
        for k in range(nl):
            a = int(acc[k, sel].sum())
            h = int(hit[k, sel].sum())
            ls = LevelStats(lv[k].name, a, h, a - h)
            if k == 1:
                ls.prefetch_issued = int(pf_issued[sel].sum())
                ls.prefetch_hits = int(pf_hits[sel].sum())
            levels.append(ls)
        return CacheStats(
            hierarchy.preset_name.value, levels, int(dram[sel].sum()), instr, alu, bb_map, cores
        )

    per_stream = []
    for s, t in enumerate(bundle):
        per_stream.append(
            build([s], t.total_instructions, int(t.records["alu_ops"].sum(dtype=np.uint64)), {}, 1)
        )
    nz = np.flatnonzero(bb_llc)
    total = build(
        slice(None),
        sum(p.total_instructions for p in per_stream),
        sum(p.total_alu_ops for p in per_stream),
        {int(b): int(bb_llc[b]) for b in nz},
        S,
    )
    total.per_stream = per_stream
    return total


def simulate(trace: Trace, hierarchy: HierarchyConfig) -> CacheStats:
    if len(trace) == 0:
        raise EmptyTrace("cannot simulate an empty trace")
    return simulate_multicore([trace], hierarchy)
