"""End-to-end analysis of one function: locality, sweep, model, classification."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .cachesim import ConfigInvalid, by_preset, scalability_sweep
from .classify import Classification, classify, lfmr_slope_value
from .config import RunConfig
from .locality import LocalityProfile, locality_profile
from .model import ScalabilityPoint, SpeedupCurve, compare
from .trace import EmptyTrace, IoFailure, Trace, load, shard_trace

TraceBundles = Mapping[int, Sequence[Trace]]

METRIC_COLUMNS = ("function", "func_id", "class", "spatial", "temporal", "ai", "mpki", "lfmr", "lfmr_slope")


@dataclass
class FunctionReport:
    name: str
    func_id: int | None
    locality: LocalityProfile
    points: list[ScalabilityPoint]
    classification: Classification
    speedup: SpeedupCurve | None

    @property
    def label(self) -> str:
        return self.classification.label.value

    def reference(self) -> ScalabilityPoint:
        return by_preset(self.points, "host")[0]

    def metrics_row(self) -> dict:
        ref = self.reference().metrics
        return {
            "function": self.name,
            "func_id": self.func_id,
            "class": self.label,
            "spatial": self.locality.spatial,
            "temporal": self.locality.temporal,
            "ai": ref.ai,
            "mpki": ref.mpki,
            "lfmr": ref.lfmr,
            "lfmr_slope": self.classification.inputs["slope_value"],
        }

    def to_dict(self) -> dict:
        d = self.classification.to_dict(self.func_id)
        d["function"] = self.name
        d["locality"] = self.locality.to_dict()
        d["sweep"] = [p.to_row() for p in self.points]
        d["speedup"] = self.speedup.rows() if self.speedup else []
        return d


def analyze_function(name: str, bundles: TraceBundles, cfg: RunConfig | None = None,
                     func_id: int | None = None) -> FunctionReport:
    """Run the full pipeline on ``{core_count: [stream traces]}``.

    Locality comes from the smallest core count's streams; classification uses
    the Host points; the speedup curve needs both Host and NDP in the sweep.
    """
    cfg = cfg or RunConfig()
    if "host" not in cfg.presets:
        raise ConfigInvalid("analysis needs the host preset for classification")
    if not bundles:
        raise EmptyTrace(f"{name}: no trace bundles")
    base = bundles[min(bundles)]
    loc = locality_profile(base, cfg.window_w, cfg.window_l, cfg.reuse_mode)
    points = scalability_sweep(bundles, cfg.hierarchies(), loc, cfg.granularity, cfg.jobs)
    host = by_preset(points, "host")
    result = classify(host, loc, cfg.threshold_obj())
    curve = compare(host, by_preset(points, "ndp")) if "ndp" in cfg.presets else None
    return FunctionReport(name, func_id, loc, points, result, curve)


# input loading -----------------------------------------------------------


def bundles_from_trace(trace: Trace, cores: Sequence[int], granularity: int = 64) -> dict[int, list[Trace]]:
    """Approximate a c-core run by dealing one trace's records to c streams."""
    return {c: shard_trace(trace, c, granularity) for c in sorted(cores)}


def read_manifest(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise IoFailure(f"{path}: cannot read manifest ({e})") from None
    if data.get("format") != "DMV1" or "functions" not in data:
        raise IoFailure(f"{path}: not a trace manifest")
    return data


def load_inputs(paths: Sequence, cfg: RunConfig) -> list[tuple[str, int | None, dict[int, list[Trace]]]]:
    """Turn manifest and trace paths into named per-function bundle sets."""
    out = []
    for p in paths:
        p = Path(p)
        if p.suffix == ".json":
            man = read_manifest(p)
            for fn in man["functions"]:
                have = {int(c): files for c, files in fn["bundles"].items()}
                cores = sorted(set(have) & set(cfg.cores))
                if not cores:
                    raise ConfigInvalid(f"{fn['name']}: none of cores {cfg.cores} present in {p.name}")
                bundles = {c: [load(p.parent / f) for f in have[c]] for c in cores}
                out.append((fn["name"], fn.get("func_id"), bundles))
        else:
            trace = load(p)
            if len(trace) == 0:
                raise EmptyTrace(f"{p.name}: trace has no records")
            ids = np.unique(trace.records["func_id"])
            for fid in ids:
                part = trace if len(ids) == 1 else Trace.from_records_array(
                    trace.records[trace.records["func_id"] == fid], trace.word_size
                )
                name = p.stem if len(ids) == 1 else f"{p.stem}:f{int(fid)}"
                out.append((name, int(fid), bundles_from_trace(part, cfg.cores, cfg.granularity)))
    names = [n for n, _, _ in out]
    if len(set(names)) != len(names):
        raise ConfigInvalid("duplicate function names across inputs")
    return out
