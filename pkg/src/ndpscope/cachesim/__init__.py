"""Set-associative LRU cache hierarchy simulation and metric derivation."""
from .config import (
    CacheLevelConfig,
    ConfigInvalid,
    DramConfig,
    HierarchyConfig,
    PrefetcherConfig,
    Preset,
    preset,
)
from .engine import EmptyBundle, simulate, simulate_multicore
from .metrics import DivisionGuard, FunctionMetrics, metrics
from .reference import simulate_reference
from .stats import CacheStats, LevelStats
from .sweep import by_preset, scalability_sweep

__all__ = [
    "CacheLevelConfig",
    "CacheStats",
    "ConfigInvalid",
    "DivisionGuard",
    "DramConfig",
    "EmptyBundle",
    "FunctionMetrics",
    "HierarchyConfig",
    "LevelStats",
    "PrefetcherConfig",
    "Preset",
    "by_preset",
    "metrics",
    "preset",
    "scalability_sweep",
    "simulate",
    "simulate_multicore",
    "simulate_reference",
]
