from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class LevelStats:
    name: str
    accesses: int = 0
    hits: int = 0
    misses: int = 0
    prefetch_issued: int = 0
    prefetch_hits: int = 0

    @property
    def miss_ratio(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0

    def counters(self) -> tuple[int, int, int]:
        return self.accesses, self.hits, self.misses


@dataclass
class CacheStats:
    """Demand counters per level plus DRAM, instruction and block totals.

    ``accesses``/``hits``/``misses`` count demand references only; prefetch
    fills show up in ``prefetch_issued`` and in ``dram_accesses``. Per-stream
    entries of a multi-core run leave ``bb_llc_misses`` empty.
    """

    preset: str
    levels: list[LevelStats]
    dram_accesses: int = 0
    total_instructions: int = 0
    total_alu_ops: int = 0
    bb_llc_misses: dict[int, int] = field(default_factory=dict)
    core_count: int = 1
    per_stream: list["CacheStats"] | None = field(default=None, repr=False)

    @property
    def l1(self) -> LevelStats:
        return self.levels[0]

    @property
    def llc(self) -> LevelStats:
        return self.levels[-1]

    @property
    def prefetch_dram_fills(self) -> int:
        return self.dram_accesses - self.llc.misses

    def check_invariants(self, check_blocks: bool = True) -> None:
        for lv in self.levels:
            assert lv.hits + lv.misses == lv.accesses, lv
        for upper, lower in zip(self.levels, self.levels[1:]):
            assert lower.accesses == upper.misses, (upper, lower)
        assert self.dram_accesses >= self.llc.misses
        if check_blocks:
            assert sum(self.bb_llc_misses.values()) == self.llc.misses

    def same_counters(self, other: "CacheStats") -> bool:
        return (
            [lv.counters() for lv in self.levels] == [lv.counters() for lv in other.levels]
            and self.dram_accesses == other.dram_accesses
            and self.total_instructions == other.total_instructions
            and self.total_alu_ops == other.total_alu_ops
            and self.bb_llc_misses == other.bb_llc_misses
        )

    def to_dict(self, with_streams: bool = False) -> dict:
        d = {
            "preset": self.preset,
            "core_count": self.core_count,
            "levels": [
                {
                    "name": lv.name,
                    "accesses": lv.accesses,
                    "hits": lv.hits,
                    "misses": lv.misses,
                    "prefetch_issued": lv.prefetch_issued,
                    "prefetch_hits": lv.prefetch_hits,
                }
                for lv in self.levels
            ],
            "dram_accesses": self.dram_accesses,
            "total_instructions": self.total_instructions,
            "total_alu_ops": self.total_alu_ops,
            "bb_llc_misses": {str(k): v for k, v in sorted(self.bb_llc_misses.items())},
        }
        if with_streams and self.per_stream is not None:
            d["per_stream"] = [s.to_dict() for s in self.per_stream]
        return d
