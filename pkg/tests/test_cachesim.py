import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from support import random_bundle, random_hierarchy, random_trace

from ndpscope.cachesim import (
    CacheLevelConfig,
    ConfigInvalid,
    DivisionGuard,
    EmptyBundle,
    HierarchyConfig,
    PrefetcherConfig,
    Preset,
    metrics,
    preset,
    simulate,
    simulate_multicore,
    simulate_reference,
)
from ndpscope.cachesim.engine import interleave_order
from ndpscope.cachesim.stats import CacheStats, LevelStats
from ndpscope.generators import cyclic_addresses, gen_cyclic, gen_pointer_chase, gen_sequential
from ndpscope.trace import EmptyTrace, Trace

KiB, MiB = 1 << 10, 1 << 20


def test_presets_match_table():
    host = preset("host")
    assert [(lv.size_bytes, lv.ways, lv.hit_latency_cycles) for lv in host.levels] == [
        (32 * KiB, 8, 4), (256 * KiB, 8, 7), (8 * MiB, 16, 27)]
    assert [(lv.energy_hit_pj, lv.energy_miss_pj) for lv in host.levels] == [
        (15, 33), (46, 93), (945, 1904)]
    assert all(lv.line_bytes == 64 for lv in host.levels)
    assert not host.prefetcher.enabled
    pf = preset("HostPf")
    assert (pf.prefetcher.enabled, pf.prefetcher.degree, pf.prefetcher.stream_count,
            pf.prefetcher.table_entries) == (True, 2, 16, 64)
    ndp = preset(Preset.NDP)
    assert len(ndp.levels) == 1 and ndp.levels[0].size_bytes == 32 * KiB
    assert (host.dram.peak_bw_host_gbs, host.dram.peak_bw_ndp_gbs) == (115, 431)


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        CacheLevelConfig("L1", 3 * 64 * 8, 8)  # 3 sets
    with pytest.raises(ConfigInvalid):
        CacheLevelConfig("L1", 1000, 8)
    with pytest.raises(ConfigInvalid):
        HierarchyConfig((preset("host").levels[0],) * 2, preset_name="ndp")
    with pytest.raises(ConfigInvalid):
        HierarchyConfig((preset("host").levels[0],), PrefetcherConfig(enabled=True))
    with pytest.raises(ConfigInvalid):
        preset("tpu")


def test_hierarchy_dict_round_trip():
    for name in ("host", "hostpf", "ndp"):
        h = preset(name)
        assert HierarchyConfig.from_dict(h.to_dict()) == h


def test_single_line_one_miss():
    t = Trace.from_arrays([64] * 100)
    s = simulate_reference(t, preset("host"))
    assert s.l1.counters() == (100, 99, 1)
    assert simulate(t, preset("host")).same_counters(s)


def test_lru_thrash():
    h = preset("host")
    l1 = h.levels[0]
    stride = l1.sets * l1.line_bytes  # same set every time
    lines = [(i % (l1.ways + 1)) * stride for i in range(50 * (l1.ways + 1))]
    s = simulate(Trace.from_arrays(lines), h)
    assert s.l1.hits == 0
    assert s.l1.misses == len(lines)


def test_cyclic_16k_only_cold_misses():
    t = gen_cyclic(16 * KiB, 20_000)
    s = simulate(t, preset("host"))
    assert s.l1.misses == 16 * KiB // 64 == 256


def test_cyclic_128k_low_lfmr():
    # only the first pass misses L2, so LFMR is 1 / passes
    passes = 32
    t = gen_cyclic(128 * KiB, passes * 16384)
    s = simulate(t, preset("host"))
    assert metrics(s).lfmr == pytest.approx(1 / passes)
    short = gen_cyclic(128 * KiB, 3 * 16384)
    assert simulate(short, preset("host")).same_counters(simulate_reference(short, preset("host")))


def test_cyclic_64m_high_lfmr():
    t = gen_cyclic(64 * MiB, 1 << 20)
    assert metrics(simulate(t, preset("host"))).lfmr > 0.95


def test_cold_miss_law():
    # capacity above footprint: misses equal the unique lines touched
    t = gen_pointer_chase(64 * KiB, 30_000, seed=5)
    s = simulate(t, preset("host"))
    unique = len(np.unique(t.addresses // 64))
    assert s.levels[1].misses == unique  # 64 KiB fits the 256 KiB L2
    assert s.levels[0].misses >= unique


def test_multicore_private_regions_contend_in_shared_l3():
    def bundle(c):
        return [Trace.from_arrays(cyclic_addresses(3 * MiB // 2, 8 * 24576, 8, s * 2 * MiB, 64))
                for s in range(c)]

    h = preset("host")
    assert metrics(simulate_multicore(bundle(16), h)).lfmr > 0.5
    assert metrics(simulate_multicore(bundle(4), h)).lfmr < 0.2


def test_bundle_of_one_equals_simulate():
    rng = np.random.default_rng(1)
    t = random_trace(rng, 3000)
    for name in ("host", "hostpf", "ndp"):
        assert simulate_multicore([t], preset(name)).same_counters(simulate(t, preset(name)))


def test_ndp_is_private_l1_only():
    rng = np.random.default_rng(2)
    b = random_bundle(rng, streams=4)
    s = simulate_multicore(b, preset("ndp"))
    assert len(s.levels) == 1
    assert s.dram_accesses == s.l1.misses
    # private L1s: streams do not interfere, so aggregate equals the per-stream sum
    solo = [simulate(t, preset("ndp")) for t in b if len(t)]
    assert s.l1.misses == sum(x.l1.misses for x in solo)


def test_empty_inputs():
    empty = Trace.from_arrays(np.zeros(0, dtype=np.uint64))
    with pytest.raises(EmptyTrace):
        simulate(empty, preset("host"))
    with pytest.raises(EmptyBundle):
        simulate_multicore([], preset("host"))


def test_interleave_order_round_robin_blocks():
    stream, local = interleave_order([5, 2, 3], 2)
    assert list(zip(stream.tolist(), local.tolist())) == [
        (0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1),
        (0, 2), (0, 3), (2, 2), (0, 4)]


def test_differential_random_pairs():
    rng = np.random.default_rng(12345)
    for _ in range(150):
        h = random_hierarchy(rng)
        t = random_trace(rng, max_n=3000)
        fast, ref = simulate(t, h), simulate_reference(t, h)
        assert fast.same_counters(ref), (h, len(t))
        fast.check_invariants()


def test_differential_multicore():
    rng = np.random.default_rng(777)
    for _ in range(60):
        h = random_hierarchy(rng)
        b = random_bundle(rng, max_n=800)
        g = int(rng.integers(1, 100))
        fast = simulate_multicore(b, h, g)
        ref = simulate_reference(b, h, g)
        assert fast.same_counters(ref)
        assert fast.core_count == len(b)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_prefetcher_keeps_l1_and_conservation(seed):
    rng = np.random.default_rng(seed)
    t = random_trace(rng, max_n=3000)
    base = preset("host")
    pf = preset("hostpf")
    a, b = simulate(t, base), simulate(t, pf)
    b.check_invariants()
    # L1 never sees prefetches, so its demand counters are untouched
    assert a.l1.counters() == b.l1.counters()
    assert b.dram_accesses == b.llc.misses + b.prefetch_dram_fills
    assert b.levels[1].prefetch_hits <= b.levels[1].hits
    assert b.levels[1].prefetch_issued >= 0


def test_prefetcher_helps_streams():
    t = gen_sequential(1 << 16, stride_words=8)  # one new line per access
    a = simulate(t, preset("host"))
    b = simulate(t, preset("hostpf"))
    assert b.levels[1].prefetch_issued > 0
    assert b.levels[1].prefetch_hits > 0.5 * b.levels[1].accesses
    assert b.levels[1].misses < a.levels[1].misses
    assert b.dram_accesses >= len(np.unique(t.addresses // 64))


def test_reference_rejects_prefetcher():
    with pytest.raises(ConfigInvalid):
        simulate_reference(gen_sequential(10), preset("hostpf"))


def test_metric_definitions():
    s = CacheStats("host", [LevelStats("L1", 1000, 800, 200), LevelStats("L2", 200, 10, 190),
                            LevelStats("L3", 190, 10, 180)], 180, 3600, 32_000)
    m = metrics(s)
    assert m.lfmr == pytest.approx(0.9)
    assert m.ai == 32
    assert m.mpki == pytest.approx(1000 * 180 / 3600)
    s2 = CacheStats("host", [LevelStats("L1", 10, 0, 10), LevelStats("L2", 10, 0, 10),
                             LevelStats("L3", 10, 0, 50)], 50, 1000, 0)
    assert metrics(s2).mpki == 50


def test_ndp_lfmr_flagged():
    s = simulate(gen_sequential(1000), preset("ndp"))
    m = metrics(s)
    assert m.lfmr == 1.0 and m.lfmr_flagged


def test_division_guard():
    s = CacheStats("host", [LevelStats("L1", 0, 0, 0)], 0, 0, 0)
    with pytest.raises(DivisionGuard):
        metrics(s)


def test_block_attribution_sums_to_llc_misses():
    rng = np.random.default_rng(3)
    t = random_trace(rng, 5000)
    s = simulate(t, preset("host"))
    assert sum(s.bb_llc_misses.values()) == s.llc.misses


def test_stats_json_names():
    d = simulate(gen_sequential(100), preset("host")).to_dict()
    assert set(d["levels"][0]) == {"name", "accesses", "hits", "misses", "prefetch_issued", "prefetch_hits"}
    assert {"dram_accesses", "total_instructions", "total_alu_ops", "bb_llc_misses"} <= set(d)
