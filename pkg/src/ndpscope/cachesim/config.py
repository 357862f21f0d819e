"""Cache hierarchy descriptions and the Host / Host+prefetcher / NDP presets."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from enum import Enum


class ConfigInvalid(ValueError):
    code = "ConfigInvalid"


class Preset(str, Enum):
    HOST = "host"
    HOST_PF = "hostpf"
    NDP = "ndp"

    @classmethod
    def parse(cls, name) -> "Preset":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("+", "").replace("-", "").replace("_", "")
        aliases = {"host": cls.HOST, "hostpf": cls.HOST_PF, "hostprefetcher": cls.HOST_PF, "ndp": cls.NDP}
        if key not in aliases:
            raise ConfigInvalid(f"unknown preset {name!r}")
        return aliases[key]


def _pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class CacheLevelConfig:
    name: str
    size_bytes: int
    ways: int
    line_bytes: int = 64
    hit_latency_cycles: int = 4
    energy_hit_pj: float = 0.0
    energy_miss_pj: float = 0.0

    def __post_init__(self):
        if self.size_bytes <= 0 or self.ways <= 0 or self.line_bytes <= 0:
            raise ConfigInvalid(f"{self.name}: sizes must be positive")
        if not _pow2(self.line_bytes):
            raise ConfigInvalid(f"{self.name}: line size {self.line_bytes} is not a power of two")
        if self.size_bytes % (self.ways * self.line_bytes):
            raise ConfigInvalid(f"{self.name}: size not divisible by ways * line_bytes")
        if not _pow2(self.sets):
            raise ConfigInvalid(f"{self.name}: set count {self.sets} is not a power of two")

    @property
    def sets(self) -> int:
        return self.size_bytes // (self.ways * self.line_bytes)


@dataclass(frozen=True)
class PrefetcherConfig:
    enabled: bool = False
    degree: int = 2
    stream_count: int = 16
    table_entries: int = 64

    def __post_init__(self):
        if self.enabled and (self.degree < 1 or self.stream_count < 1 or self.table_entries < 1):
            raise ConfigInvalid("prefetcher degree, stream_count and table_entries must be >= 1")


@dataclass(frozen=True)
class DramConfig:
    # flat latencies are estimates, not measured values
    latency_host_cycles: float = 140.0
    latency_ndp_cycles: float = 96.0
    energy_internal_pj_per_bit: float = 2.0
    energy_logic_pj_per_bit: float = 8.0
    energy_link_pj_per_bit: float = 2.0
    peak_bw_host_gbs: float = 115.0
    peak_bw_ndp_gbs: float = 431.0


@dataclass(frozen=True)
class HierarchyConfig:
    levels: tuple[CacheLevelConfig, ...]
    prefetcher: PrefetcherConfig = field(default_factory=PrefetcherConfig)
    dram: DramConfig = field(default_factory=DramConfig)
    preset_name: Preset = Preset.HOST
    core_freq_ghz: float = 2.4

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "preset_name", Preset.parse(self.preset_name))
        if not 1 <= len(self.levels) <= 3:
            raise ConfigInvalid("a hierarchy has between 1 and 3 cache levels")
        if len({lv.line_bytes for lv in self.levels}) != 1:
            raise ConfigInvalid("all levels must share one line size")
        if self.preset_name is Preset.NDP and (len(self.levels) != 1 or self.prefetcher.enabled):
            raise ConfigInvalid("the NDP preset has exactly one cache level and no prefetcher")
        if self.prefetcher.enabled and len(self.levels) < 2:
            raise ConfigInvalid("the stream prefetcher fills into L2; it needs at least two levels")

    @property
    def line_bytes(self) -> int:
        return self.levels[0].line_bytes

    @property
    def is_ndp(self) -> bool:
        return self.preset_name is Preset.NDP

    @property
    def dram_latency(self) -> float:
        return self.dram.latency_ndp_cycles if self.is_ndp else self.dram.latency_host_cycles

    @property
    def peak_bw_gbs(self) -> float:
        return self.dram.peak_bw_ndp_gbs if self.is_ndp else self.dram.peak_bw_host_gbs

    def to_dict(self) -> dict:
        d = asdict(self)
        d["preset_name"] = self.preset_name.value
        d["levels"] = [asdict(lv) for lv in self.levels]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "HierarchyConfig":
        return cls(
            levels=tuple(CacheLevelConfig(**lv) for lv in d["levels"]),
            prefetcher=PrefetcherConfig(**d.get("prefetcher", {})),
            dram=DramConfig(**d.get("dram", {})),
            preset_name=d.get("preset_name", "host"),
            core_freq_ghz=d.get("core_freq_ghz", 2.4),
        )


KiB = 1 << 10
MiB = 1 << 20

L1 = CacheLevelConfig("L1", 32 * KiB, 8, 64, 4, 15.0, 33.0)
L2 = CacheLevelConfig("L2", 256 * KiB, 8, 64, 7, 46.0, 93.0)
L3 = CacheLevelConfig("L3", 8 * MiB, 16, 64, 27, 945.0, 1904.0)


def preset(name, **overrides) -> HierarchyConfig:
    """Host, Host+prefetcher or NDP configuration with the default parameters.

    Keyword overrides replace top-level HierarchyConfig fields (``dram``,
    ``levels``, ``prefetcher``, ``core_freq_ghz``).
    """
    p = Preset.parse(name)
    if p is Preset.HOST:
        cfg = HierarchyConfig((L1, L2, L3), PrefetcherConfig(enabled=False), DramConfig(), p)
    elif p is Preset.HOST_PF:
        cfg = HierarchyConfig((L1, L2, L3), PrefetcherConfig(enabled=True), DramConfig(), p)
    else:
        cfg = HierarchyConfig((L1,), PrefetcherConfig(enabled=False), DramConfig(), p)
    return replace(cfg, **overrides) if overrides else cfg
