"""Random inputs shared by the differential tests and the acceptance suite."""
import numpy as np

from ndpscope.cachesim import CacheLevelConfig, HierarchyConfig, PrefetcherConfig
from ndpscope.generators import gen_pointer_chase, gen_single_address
from ndpscope.trace import Trace


def random_hierarchy(rng, prefetch=False) -> HierarchyConfig:
    line = int(rng.choice([16, 32, 64]))
    nlev = int(rng.integers(1, 4))
    levels = []
    for k in range(nlev):
        sets = 1 << int(rng.integers(0, 7))
        ways = int(rng.integers(1, 9))
        levels.append(
            CacheLevelConfig(f"L{k + 1}", sets * ways * line, ways, line, 4 + 3 * k, 1.0, 2.0)
        )
    pf = PrefetcherConfig(enabled=prefetch and nlev >= 2)
    return HierarchyConfig(tuple(levels), pf, preset_name="host")


def random_trace(rng, n=None, max_n=10_000) -> Trace:
    n = int(rng.integers(1, max_n + 1)) if n is None else n
    kind = rng.integers(0, 4)
    if kind == 0:  # uniform over a small footprint so both hits and misses happen
        addr = rng.integers(0, 1 << int(rng.integers(8, 18)), size=n)
    elif kind == 1:  # strided sweep with wrap
        stride = int(rng.integers(1, 200))
        foot = int(rng.integers(1, 1 << 16))
        addr = (np.arange(n) * stride) % foot
    elif kind == 2:  # hot set plus noise
        hot = rng.integers(0, 1 << 12, size=16)
        addr = np.where(rng.random(n) < 0.8, rng.choice(hot, size=n), rng.integers(0, 1 << 20, size=n))
    else:  # few lines hammered in one set pattern
        addr = rng.integers(0, 12, size=n) * 4096
    return Trace.from_arrays(
        addr.astype(np.uint64),
        bb_id=rng.integers(0, 5, size=n),
        alu_ops=rng.integers(0, 4, size=n),
        instr_gap=rng.integers(1, 6, size=n),
    )


def random_bundle(rng, streams=None, max_n=2000) -> list[Trace]:
    s = int(rng.integers(1, 7)) if streams is None else streams
    return [random_trace(rng, max_n=max_n) for _ in range(s)]


def interleave(parts) -> Trace:
    """Round-robin records from several traces into one."""
    n = max(len(p) for p in parts)
    order = [(i, k) for k in range(n) for i, p in enumerate(parts) if k < len(p)]
    pick = lambda field: [int(parts[i].records[field][k]) for i, k in order]  # noqa: E731
    return Trace.from_arrays(pick("addr"), bb_id=pick("bb_id"))


def one_hot_block_trace(hot_bb=7) -> Trace:
    """Block ``hot_bb`` chases 64 MiB; nine other blocks each hammer one cached line."""
    chase = gen_pointer_chase(64 << 20, 20_000, seed=1, bb_id=hot_bb)
    others = [b for b in range(10) if b != hot_bb]
    small = [gen_single_address(2000, addr=(b + 1) << 12, bb_id=b) for b in others]
    return interleave([chase] + small)
