"""Analytical AMAT, energy and bandwidth-capped throughput for Host vs NDP.

This is a first-order model, not a timing simulator: DRAM is a flat latency,
queueing is ignored, and the per-core issue rate is

    r = 1 / (cpi_base + refs_per_instr * (AMAT - L1 latency))

capped in aggregate by peak DRAM bandwidth.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .cachesim.metrics import FunctionMetrics
from .cachesim.stats import CacheStats
from .classify import PresetMismatch

CPI_BASE = 1.0


class MismatchedSweep(ValueError):
    code = "MismatchedSweep"


@dataclass(frozen=True)
class EnergyBreakdown:
    l1_pj: float = 0.0
    l2_pj: float = 0.0
    l3_pj: float = 0.0
    dram_pj: float = 0.0
    link_pj: float = 0.0

    @property
    def total_pj(self) -> float:
        return self.l1_pj + self.l2_pj + self.l3_pj + self.dram_pj + self.link_pj

    def to_dict(self) -> dict:
        return {
            "l1_pj": self.l1_pj,
            "l2_pj": self.l2_pj,
            "l3_pj": self.l3_pj,
            "dram_pj": self.dram_pj,
            "link_pj": self.link_pj,
            "total_pj": self.total_pj,
        }


@dataclass
class ScalabilityPoint:
    core_count: int
    preset: str
    metrics: FunctionMetrics
    amat_cycles: float
    energy: EnergyBreakdown
    rel_throughput: float
    throughput_ipc: float = 0.0
    stats: CacheStats | None = field(default=None, repr=False)

    CSV_COLUMNS = (
        "core_count", "preset", "ai", "mpki", "lfmr", "amat_cycles",
        "l1_pj", "l2_pj", "l3_pj", "dram_pj", "link_pj", "total_pj", "rel_throughput",
    )

    def to_row(self) -> dict:
        row = {
            "core_count": self.core_count,
            "preset": self.preset,
            "ai": self.metrics.ai,
            "mpki": self.metrics.mpki,
            "lfmr": self.metrics.lfmr,
            "amat_cycles": self.amat_cycles,
        }
        row.update(self.energy.to_dict())
        row["rel_throughput"] = self.rel_throughput
        return row


def _check(stats: CacheStats, hierarchy) -> None:
    if stats.preset != hierarchy.preset_name.value or len(stats.levels) != len(hierarchy.levels):
        raise PresetMismatch(
            f"stats from preset {stats.preset!r} ({len(stats.levels)} levels) do not match "
            f"hierarchy {hierarchy.preset_name.value!r} ({len(hierarchy.levels)} levels)"
        )


def amat_from_ratios(miss_ratios: Sequence[float], hierarchy) -> float:
    """Nested AMAT: lat1 + m1*(lat2 + m2*(... + mN*DRAM))."""
    lats = [lv.hit_latency_cycles for lv in hierarchy.levels]
    t = hierarchy.dram_latency
    for lat, m in zip(reversed(lats), reversed(list(miss_ratios))):
        t = lat + m * t
    return t


def amat(stats: CacheStats, hierarchy) -> float:
    _check(stats, hierarchy)
    return amat_from_ratios([lv.miss_ratio for lv in stats.levels], hierarchy)


def energy(stats: CacheStats, hierarchy) -> EnergyBreakdown:
    """Cache energy per demand hit/miss plus per-bit DRAM (and, off-chip, link) energy."""
    _check(stats, hierarchy)
    parts = [0.0, 0.0, 0.0]
    for k, (lv, cfg) in enumerate(zip(stats.levels, hierarchy.levels)):
        parts[k] = lv.hits * cfg.energy_hit_pj + lv.misses * cfg.energy_miss_pj
    bits = hierarchy.line_bytes * 8 * stats.dram_accesses
    d = hierarchy.dram
    dram_pj = bits * (d.energy_internal_pj_per_bit + d.energy_logic_pj_per_bit)
    link_pj = 0.0 if hierarchy.is_ndp else bits * d.energy_link_pj_per_bit
    return EnergyBreakdown(parts[0], parts[1], parts[2], dram_pj, link_pj)


def bandwidth_cap_ipc(stats: CacheStats, hierarchy) -> float:
    """Aggregate instructions/cycle the DRAM bandwidth can sustain."""
    if stats.total_instructions <= 0 or stats.dram_accesses == 0:
        return float("inf")
    bytes_per_instr = stats.dram_accesses * hierarchy.line_bytes / stats.total_instructions
    bytes_per_cycle = hierarchy.peak_bw_gbs / hierarchy.core_freq_ghz
    return bytes_per_cycle / bytes_per_instr


def throughput_ipc(stats: CacheStats, amat_cycles: float, core_count: int, hierarchy,
                   cpi_base: float = CPI_BASE) -> float:
    """Aggregate instructions per cycle across ``core_count`` cores."""
    refs = stats.l1.accesses / stats.total_instructions if stats.total_instructions else 0.0
    stall = max(0.0, amat_cycles - hierarchy.levels[0].hit_latency_cycles)
    per_core = 1.0 / (cpi_base + refs * stall)
    return min(core_count * per_core, bandwidth_cap_ipc(stats, hierarchy))


def throughput_estimate(stats: CacheStats, amat_cycles: float, core_count: int, hierarchy,
                        baseline_ipc: float | None = None, cpi_base: float = CPI_BASE) -> float:
    """Throughput relative to ``baseline_ipc`` (the 1-core Host figure).

    Without a baseline the point is its own reference and the result is 1.
    """
    ipc = throughput_ipc(stats, amat_cycles, core_count, hierarchy, cpi_base)
    return ipc / (ipc if baseline_ipc is None else baseline_ipc)


@dataclass
class SpeedupCurve:
    core_counts: list[int]
    speedup: list[float]
    energy_ratio: list[float]  # NDP total energy / Host total energy

    def rows(self) -> list[dict]:
        return [
            {"core_count": c, "speedup": s, "energy_ratio": e}
            for c, s, e in zip(self.core_counts, self.speedup, self.energy_ratio)
        ]


def compare(points_host: Sequence[ScalabilityPoint], points_ndp: Sequence[ScalabilityPoint]) -> SpeedupCurve:
    host = sorted(points_host, key=lambda p: p.core_count)
    ndp = sorted(points_ndp, key=lambda p: p.core_count)
    if [p.core_count for p in host] != [p.core_count for p in ndp]:
        raise MismatchedSweep("host and NDP sweeps cover different core counts")
    speed, eratio = [], []
    for h, n in zip(host, ndp):
        speed.append(n.rel_throughput / h.rel_throughput)
        he = h.energy.total_pj
        eratio.append(n.energy.total_pj / he if he else float("nan"))
    return SpeedupCurve([p.core_count for p in host], speed, eratio)
