"""Vault interleaving, 2D-mesh hop distances, and hot basic-block attribution."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trace import EmptyTrace, Trace


class HomeOutOfBounds(ValueError):
    code = "HomeOutOfBounds"


class NoMissData(ValueError):
    code = "NoMissData"


@dataclass(frozen=True)
class MeshConfig:
    width: int = 6
    height: int = 6
    vault_count: int = 32
    vault_positions: tuple[tuple[int, int], ...] | None = None  # default: row-major first nodes
    per_hop_latency_cycles: float = 3.0
    line_bytes: int = 64

    def __post_init__(self):
        if self.vault_count > self.width * self.height:
            raise ValueError("more vaults than mesh nodes")
        if self.vault_positions is None:
            pos = tuple((v % self.width, v // self.width) for v in range(self.vault_count))
            object.__setattr__(self, "vault_positions", pos)
        else:
            pos = tuple((int(x), int(y)) for x, y in self.vault_positions)
            object.__setattr__(self, "vault_positions", pos)
        if len(self.vault_positions) != self.vault_count:
            raise ValueError("need one position per vault")
        if len(set(self.vault_positions)) != self.vault_count:
            raise ValueError("vault positions must be distinct")
        for x, y in self.vault_positions:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"vault position {(x, y)} outside the mesh")

    @property
    def diameter(self) -> int:
        return (self.width - 1) + (self.height - 1)

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "vault_count": self.vault_count,
            "vault_positions": [list(p) for p in self.vault_positions],
            "per_hop_latency_cycles": self.per_hop_latency_cycles,
            "line_bytes": self.line_bytes,
        }


def vault_of(addr, mesh: MeshConfig = MeshConfig()):
    """Consecutive cache lines go to consecutive vaults. Works on scalars and arrays."""
    if isinstance(addr, np.ndarray):
        return (addr // np.uint64(mesh.line_bytes)) % np.uint64(mesh.vault_count)
    return (int(addr) // mesh.line_bytes) % mesh.vault_count


@dataclass
class HopHistogram:
    bins: dict[int, float]
    requests: int = 0

    @property
    def local_fraction(self) -> float:
        return self.bins.get(0, 0.0)

    @property
    def mean_hops(self) -> float:
        return sum(h * f for h, f in sorted(self.bins.items()))

    def to_dict(self) -> dict:
        return {
            "bins": [[h, f] for h, f in sorted(self.bins.items())],
            "local_fraction": self.local_fraction,
            "mean_hops": self.mean_hops,
            "requests": self.requests,
        }


def vault_hops(mesh: MeshConfig, home: tuple[int, int]) -> np.ndarray:
    hx, hy = home
    if not (0 <= hx < mesh.width and 0 <= hy < mesh.height):
        raise HomeOutOfBounds(f"home {home} outside a {mesh.width}x{mesh.height} mesh")
    return np.array([abs(x - hx) + abs(y - hy) for x, y in mesh.vault_positions], dtype=np.int64)


def hop_histogram(trace: Trace, mesh: MeshConfig = MeshConfig(), home: tuple[int, int] = (0, 0)) -> HopHistogram:
    """Fraction of requests travelling each Manhattan hop count from ``home``."""
    hops_per_vault = vault_hops(mesh, home)
    if len(trace) == 0:
        raise EmptyTrace("no requests to route")
    vaults = vault_of(trace.addresses, mesh).astype(np.int64)
    per_vault = np.bincount(vaults, minlength=mesh.vault_count)
    per_hop = np.bincount(hops_per_vault, weights=per_vault, minlength=mesh.diameter + 1)
    n = len(trace)
    bins = {int(h): float(c) / n for h, c in enumerate(per_hop) if c}
    return HopHistogram(bins, n)


def noc_overhead(hist: HopHistogram, mesh: MeshConfig = MeshConfig(), round_trip: bool = False) -> float:
    """Mean added NoC cycles per request (one-way unless ``round_trip``)."""
    cycles = sum(f * h * mesh.per_hop_latency_cycles for h, f in sorted(hist.bins.items()))
    return 2 * cycles if round_trip else cycles


@dataclass
class BlockMissReport:
    blocks: list[tuple[int, int]] = field(default_factory=list)  # (bb_id, llc misses), descending
    total_misses: int = 0

    @property
    def cumulative(self) -> list[float]:
        out, run = [], 0
        for _, n in self.blocks:
            run += n
            out.append(run / self.total_misses)
        return out

    @property
    def hottest(self) -> int:
        return self.blocks[0][0]

    def share(self, bb_id: int) -> float:
        return dict(self.blocks).get(bb_id, 0) / self.total_misses

    def rows(self) -> list[dict]:
        return [
            {"bb_id": bb, "llc_misses": n, "fraction": n / self.total_misses, "cumulative": cum}
            for (bb, n), cum in zip(self.blocks, self.cumulative)
        ]


def hot_blocks(stats) -> BlockMissReport:
    """Rank basic blocks by the LLC demand misses they triggered."""
    counts = {int(k): int(v) for k, v in stats.bb_llc_misses.items() if v}
    total = sum(counts.values())
    if total == 0:
        raise NoMissData("no LLC misses attributed to any basic block")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return BlockMissReport(ranked, total)
