"""Run configuration: defaults, a JSON config file, and command-line overrides.

Precedence, lowest to highest: built-in defaults, the ``--config`` file,
explicit command-line flags. The merged result is what every run echoes to
``effective_config.json``; feeding that file back with ``--config`` reproduces
the run.
"""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import jsonschema

from .archetypes import CORE_COUNTS, SCALES
from .cachesim.config import (
    CacheLevelConfig,
    ConfigInvalid,
    DramConfig,
    HierarchyConfig,
    PrefetcherConfig,
    Preset,
    preset,
)
from .classify import Thresholds
from .locality import ReuseMode
from .ndp_analysis import MeshConfig
from .trace import WORD_SIZES

FORMATS = ("json", "csv")

_pos_int = {"type": "integer", "minimum": 1}

_level_override = {
    "type": "object",
    "properties": {
        "size_bytes": _pos_int,
        "ways": _pos_int,
        "line_bytes": _pos_int,
        "hit_latency_cycles": {"type": "number", "minimum": 0},
        "energy_hit_pj": {"type": "number", "minimum": 0},
        "energy_miss_pj": {"type": "number", "minimum": 0},
    },
    "additionalProperties": False,
}

_hierarchy_override = {
    "type": "object",
    "properties": {
        "levels": {
            "type": "object",
            "propertyNames": {"enum": ["L1", "L2", "L3"]},
            "additionalProperties": _level_override,
        },
        "prefetcher": {
            "type": "object",
            "properties": {
                "enabled": {"type": "boolean"},
                "degree": _pos_int,
                "stream_count": _pos_int,
                "table_entries": _pos_int,
            },
            "additionalProperties": False,
        },
        "dram": {
            "type": "object",
            "properties": {f.name: {"type": "number", "minimum": 0} for f in fields(DramConfig)},
            "additionalProperties": False,
        },
        "core_freq_ghz": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ndpscope run configuration",
    "type": "object",
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "jobs": _pos_int,
        "formats": {
            "type": "array",
            "items": {"enum": list(FORMATS)},
            "minItems": 1,
            "uniqueItems": True,
        },
        "plots": {"type": "boolean"},
        "cores": {"type": "array", "items": _pos_int, "minItems": 1, "uniqueItems": True},
        "scale": {"anyOf": [{"enum": sorted(SCALES)}, {"type": "number", "exclusiveMinimum": 0}]},
        "granularity": _pos_int,
        "word_size": {"enum": list(WORD_SIZES)},
        "window_w": {"type": "integer", "minimum": 2},
        "window_l": {"type": "integer", "minimum": 2},
        "reuse_mode": {"enum": [m.value for m in ReuseMode]},
        "presets": {
            "type": "array",
            "items": {"enum": [p.value for p in Preset]},
            "minItems": 1,
            "uniqueItems": True,
        },
        "hierarchy": {
            "type": "object",
            "propertyNames": {"enum": [p.value for p in Preset]},
            "additionalProperties": _hierarchy_override,
        },
        "thresholds": {
            "type": "object",
            "properties": {f.name: {"type": "number", "exclusiveMinimum": 0} for f in fields(Thresholds)},
            "additionalProperties": False,
        },
        "cluster": {
            "type": "object",
            "properties": {
                "k": _pos_int,
                "linkage": {"enum": ["average", "single", "complete"]},
                "standardize": {"type": "boolean"},
                "init": {"enum": ["k-means++", "random"]},
                "n_init": _pos_int,
                "max_iter": _pos_int,
                "tol": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "mesh": {
            "type": "object",
            "properties": {
                "width": _pos_int,
                "height": _pos_int,
                "vault_count": _pos_int,
                "vault_positions": {
                    "anyOf": [
                        {"type": "null"},
                        {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 0},
                                "minItems": 2,
                                "maxItems": 2,
                            },
                        },
                    ]
                },
                "per_hop_latency_cycles": {"type": "number", "minimum": 0},
                "line_bytes": _pos_int,
            },
            "additionalProperties": False,
        },
        "home": {
            "type": "array",
            "items": {"type": "integer", "minimum": 0},
            "minItems": 2,
            "maxItems": 2,
        },
        "round_trip": {"type": "boolean"},
    },
    "additionalProperties": False,
}


def _default_cluster() -> dict:
    return {"k": 2, "linkage": "average", "standardize": True, "init": "k-means++",
            "n_init": 10, "max_iter": 100, "tol": 1e-9}


@dataclass
class RunConfig:
    seed: int = 0
    jobs: int = 1
    formats: list = field(default_factory=lambda: list(FORMATS))
    plots: bool = False
    cores: list = field(default_factory=lambda: list(CORE_COUNTS))
    scale: object = "default"
    granularity: int = 64
    word_size: int = 8
    window_w: int = 32
    window_l: int = 32
    reuse_mode: str = ReuseMode.OCCURRENCES.value
    presets: list = field(default_factory=lambda: [p.value for p in Preset])
    hierarchy: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=lambda: asdict(Thresholds()))
    cluster: dict = field(default_factory=_default_cluster)
    mesh: dict = field(default_factory=lambda: {**MeshConfig().to_dict(), "vault_positions": None})
    home: list = field(default_factory=lambda: [0, 0])
    round_trip: bool = False

    def to_dict(self) -> dict:
        return copy.deepcopy(asdict(self))

    # derived objects ---------------------------------------------------

    def hierarchies(self) -> list[HierarchyConfig]:
        return [build_hierarchy(p, self.hierarchy.get(p, {})) for p in self.presets]

    def threshold_obj(self) -> Thresholds:
        return Thresholds(**self.thresholds)

    def mesh_obj(self) -> MeshConfig:
        m = dict(self.mesh)
        if m.get("vault_positions") is not None:
            m["vault_positions"] = tuple(tuple(p) for p in m["vault_positions"])
        return MeshConfig(**m)


def build_hierarchy(name, override: dict) -> HierarchyConfig:
    """Apply a per-preset override dict on top of the preset defaults."""
    base = preset(name)
    if not override:
        return base
    level_over = override.get("levels", {})
    unknown = set(level_over) - {lv.name for lv in base.levels}
    if unknown:
        raise ConfigInvalid(f"preset {base.preset_name.value} has no level(s) {sorted(unknown)}")
    levels = tuple(
        CacheLevelConfig(**{**asdict(lv), **level_over.get(lv.name, {})}) for lv in base.levels
    )
    return HierarchyConfig(
        levels=levels,
        prefetcher=PrefetcherConfig(**{**asdict(base.prefetcher), **override.get("prefetcher", {})}),
        dram=DramConfig(**{**asdict(base.dram), **override.get("dram", {})}),
        preset_name=base.preset_name,
        core_freq_ghz=override.get("core_freq_ghz", base.core_freq_ghz),
    )


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict) and key != "hierarchy":
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate(data: dict) -> None:
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigInvalid(f"config {where}: {e.message}") from None


def resolve(file_data: dict | None = None, flags: dict | None = None) -> RunConfig:
    """Merge defaults, file contents and explicit flags (``None`` flags are ignored)."""
    merged = RunConfig().to_dict()
    if file_data:
        validate(file_data)
        merged = _merge(merged, file_data)
    if flags:
        merged = _merge(merged, {k: v for k, v in flags.items() if v is not None})
    validate(merged)
    merged["cores"] = sorted(merged["cores"])
    cfg = RunConfig(**merged)
    # construct derived objects once so bad values fail before any work starts
    try:
        cfg.hierarchies()
        cfg.threshold_obj()
        cfg.mesh_obj()
    except (TypeError, ValueError) as e:
        raise ConfigInvalid(str(e)) from None
    return cfg


def load_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigInvalid(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{path}: top level must be an object")
    return data
