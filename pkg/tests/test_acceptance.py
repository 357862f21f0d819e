"""The ten acceptance criteria, each with its wall-clock budget.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""
import json
import time

import numpy as np
import pytest
from support import one_hot_block_trace, random_hierarchy, random_trace

from ndpscope.archetypes import RECIPES, gen_archetype
from ndpscope.cachesim import metrics, preset, simulate, simulate_reference
from ndpscope.classify import BottleneckClass
from ndpscope.cli import main
from ndpscope.cluster import HIER_FEATURES, KMEANS_FEATURES, FeatureVector, hierarchical, kmeans, standardize
from ndpscope.config import resolve
from ndpscope.generators import gen_cyclic, gen_random, gen_sequential, gen_single_address
from ndpscope.locality import DEFAULT_L, DEFAULT_W, spatial_locality, temporal_locality
from ndpscope.model import energy
from ndpscope.ndp_analysis import MeshConfig, hop_histogram, hot_blocks
from ndpscope.pipeline import analyze_function
from ndpscope.report import read_csv
from ndpscope.trace import decode, encode

ARCH = [c.value for c in RECIPES]
KiB, MiB = 1 << 10, 1 << 20


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


@pytest.fixture(scope="module")
def archetype_reports():
    """Full pipeline (Host, HostPf, NDP over 1..256 cores) on the six default-scale archetypes."""
    cfg = resolve()
    t0 = time.perf_counter()
    reports = {a: analyze_function(a, gen_archetype(a, "default", 0, cfg.cores), cfg, i)
               for i, a in enumerate(ARCH)}
    return reports, time.perf_counter() - t0


@pytest.mark.criterion(1, "locality oracles")
def test_c1_locality_oracles():
    with Budget(1.0):
        for s in (1, 2, 4, 8):
            assert abs(spatial_locality(gen_sequential(32 * 100, stride_words=s)) - 1 / s) <= 1e-12
        assert temporal_locality(gen_sequential(32 * 100)) == 0.0
        assert temporal_locality(gen_single_address(32 * 10), mode="occurrences") == 1.0
        assert DEFAULT_W == DEFAULT_L == 32


@pytest.mark.criterion(2, "cache simulator differential test")
def test_c2_differential():
    rng = np.random.default_rng(2024)
    pairs = 0
    with Budget(60.0):
        for _ in range(1000):
            h = random_hierarchy(rng)
            t = random_trace(rng, max_n=10_000)
            assert len(t) <= 10_000
            fast, ref = simulate(t, h), simulate_reference(t, h)
            assert fast.same_counters(ref), (h, len(t))
            pairs += 1
    assert pairs >= 1000


@pytest.mark.criterion(3, "LFMR regimes")
def test_c3_lfmr_regimes():
    with Budget(30.0):
        host = preset("host")
        low = metrics(simulate(gen_cyclic(128 * KiB, 32 * (128 * KiB // 8)), host)).lfmr
        high = metrics(simulate(gen_cyclic(64 * MiB, 1 << 20), host)).lfmr
    assert low < 0.05
    assert high > 0.95


@pytest.mark.criterion(4, "classification round-trip")
def test_c4_classification(archetype_reports):
    reports, elapsed = archetype_reports
    assert elapsed < 300
    got = {a: r.classification.label for a, r in reports.items()}
    assert got == {a: BottleneckClass.parse(a) for a in ARCH}


@pytest.mark.criterion(5, "directional NDP speedups")
def test_c5_directional(archetype_reports):
    reports, elapsed = archetype_reports
    assert elapsed < 300
    sp = {a: r.speedup.speedup for a, r in reports.items()}
    cores = reports["1a"].speedup.core_counts
    assert cores == [1, 4, 16, 64, 256]
    assert sp["1a"][-1] >= 1.5
    assert abs(sp["1a"][-1] - 3.7) <= 0.1 * 3.7
    assert all(s > 1 for s in sp["1b"])
    assert sp["1c"][0] > 1 and sp["1c"][-1] <= 1.05
    assert sp["2a"][0] < 1 and sp["2a"][-1] > 1
    assert all(0.9 <= s <= 1.1 for s in sp["2b"])
    assert all(s < 1 for s in sp["2c"])


@pytest.mark.criterion(6, "energy model anchors")
def test_c6_energy():
    from ndpscope.cachesim.stats import CacheStats, LevelStats

    with Budget(60.0):
        h, n = preset("host"), preset("ndp")
        one = CacheStats("host", [LevelStats(f"L{i}", 1, 0, 1) for i in (1, 2, 3)], 1, 1, 0)
        e = energy(one, h)
        assert e.dram_pj + e.link_pj == 6144
        one_ndp = CacheStats("ndp", [LevelStats("L1", 1, 0, 1)], 1, 1, 0)
        e = energy(one_ndp, n)
        assert e.dram_pj + e.link_pj == 5120
        assert e.l2_pj == e.l3_pj == e.link_pj == 0
        cfg = resolve()
        r = analyze_function("1b", gen_archetype("1b", "default", 0, cfg.cores), cfg)
        assert all(x < 1 for x in r.speedup.energy_ratio)


@pytest.mark.criterion(7, "NoC local fraction and mean hops")
def test_c7_noc():
    with Budget(10.0):
        m = MeshConfig()
        hist = hop_histogram(gen_random(200_000, 1 << 30, seed=11), m, (0, 0))
        assert abs(hist.local_fraction - 1 / 32) <= 0.005
        assert hist.local_fraction < 0.05
        t = gen_sequential(32 * 8 * 50, stride_words=8)
        for home in [(x, y) for x in range(6) for y in range(6)]:
            want = sum(abs(x - home[0]) + abs(y - home[1]) for x, y in m.vault_positions) / 32
            assert abs(hop_histogram(t, m, home).mean_hops - want) <= 1e-9


@pytest.mark.criterion(8, "hot basic block attribution")
def test_c8_hot_block():
    with Budget(30.0):
        rep = hot_blocks(simulate(one_hot_block_trace(7), preset("host")))
    assert rep.hottest == 7
    assert rep.share(7) >= 0.9


@pytest.fixture(scope="module")
def replica_rows():
    """Metric rows for the six archetypes at seeds 0, 1, 2 (Host sweep only)."""
    cfg = resolve(None, {"presets": ["host"]})
    rows = []
    for seed in (0, 1, 2):
        for i, a in enumerate(ARCH):
            r = analyze_function(f"{a}/s{seed}", gen_archetype(a, "default", seed, cfg.cores), cfg, i)
            assert r.classification.label is BottleneckClass.parse(a)
            rows.append(r.metrics_row())
    return rows


@pytest.mark.criterion(9, "clustering")
def test_c9_clustering(replica_rows):
    def vecs(rows, feats):
        return [FeatureVector(r["function"], tuple(float(r[f]) for f in feats)) for r in rows]

    with Budget(10.0):
        seed0 = [r for r in replica_rows if r["function"].endswith("/s0")]
        km = kmeans(standardize(vecs(seed0, KMEANS_FEATURES)), 2, seed=0)
        groups = [sorted(n.split("/")[0] for n in g) for g in km.groups()]
        assert sorted(groups) == [["1a", "1b", "1c"], ["2a", "2b", "2c"]]

        dend = hierarchical(standardize(vecs(replica_rows, HIER_FEATURES)))
        cls = {i: {lab.split("/")[0]} for i, lab in enumerate(dend.labels)}
        complete = 0
        for j, (a, b, _) in enumerate(dend.merges):
            node = dend.n + j
            cls[node] = cls[a] | cls[b]
            if len(cls[node]) > 1:
                break  # first cross-class merge
            complete += 1
        # 6 classes x 3 replicas need 12 same-class merges before anything mixes
        assert complete >= 12


@pytest.mark.criterion(10, "determinism and formats")
def test_c10_determinism(tmp_path):
    def snapshot(d):
        return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}

    with Budget(60.0):
        runs = []
        for k in (0, 1):
            root = tmp_path / f"run{k}"
            gen = root / "gen"
            assert main(["gen", "--archetype", "all", "--scale", "tiny", "--cores", "1,4", "--seed", "3",
                         "-o", str(gen)]) == 0
            assert main(["analyze", str(gen / "manifest.json"), "--cores", "1,4", "-o", str(root / "an")]) == 0
            metrics_csv = str(root / "an" / "metrics.csv")
            assert main(["cluster", metrics_csv, "--kind", "kmeans", "-o", str(root / "km")]) == 0
            assert main(["cluster", metrics_csv, "-o", str(root / "hc")]) == 0
            trace = str(gen / "1a" / "c1" / "s0000.dmv")
            assert main(["noc", trace, "-o", str(root / "noc")]) == 0
            assert main(["hotblocks", trace, "-o", str(root / "hb")]) == 0
            runs.append(snapshot(root))
        assert runs[0] == runs[1]

        root = tmp_path / "run0"
        dmv = [p for p in root.rglob("*.dmv")]
        assert dmv
        for p in dmv:
            raw = p.read_bytes()
            assert encode(decode(raw)) == raw

        hops = json.loads((root / "noc" / "hops.json").read_text())
        assert abs(sum(f for _, f in hops["bins"]) - 1) <= 1e-9
        assert abs(sum(float(r["fraction"]) for r in read_csv(root / "noc" / "hops.csv")) - 1) <= 1e-9
        blocks = json.loads((root / "hb" / "blocks.json").read_text())
        assert abs(sum(b["fraction"] for b in blocks["blocks"]) - 1) <= 1e-9
