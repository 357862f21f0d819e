"""Six-class memory-bottleneck decision procedure over a scalability sweep."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Sequence


class BottleneckClass(str, Enum):
    C1A = "1a"  # DRAM bandwidth-bound
    C1B = "1b"  # DRAM latency-bound
    C1C = "1c"  # L1/L2 cache capacity
    C2A = "2a"  # L3 cache contention
    C2B = "2b"  # L1 cache capacity
    C2C = "2c"  # compute-bound
    UNCLASSIFIED = "unclassified"

    @classmethod
    def parse(cls, label) -> "BottleneckClass":
        if isinstance(label, cls):
            return label
        text = str(label).strip().lower()
        if text.startswith("c") and len(text) == 3:
            text = text[1:]
        return cls(text)


DESCRIPTIONS = {
    BottleneckClass.C1A: "DRAM bandwidth-bound",
    BottleneckClass.C1B: "DRAM latency-bound",
    BottleneckClass.C1C: "L1/L2 cache capacity bottlenecked",
    BottleneckClass.C2A: "L3 cache contention bottlenecked",
    BottleneckClass.C2B: "L1 cache capacity bottlenecked",
    BottleneckClass.C2C: "compute-bound",
}


class SlopeClass(str, Enum):
    DECREASING = "decreasing"
    FLAT = "flat"
    INCREASING = "increasing"


class TooFewPoints(ValueError):
    code = "TooFewPoints"


class PresetMismatch(ValueError):
    code = "PresetMismatch"


@dataclass(frozen=True)
class Thresholds:
    temporal_thr: float = 0.48
    lfmr_thr: float = 0.56
    mpki_thr: float = 11.0
    ai_thr: float = 8.5
    slope_delta: float = 0.15

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"threshold {name} must be > 0, got {value}")
        if not 0 < self.slope_delta < 1:
            raise ValueError("slope_delta must lie in (0, 1)")


def default_thresholds() -> Thresholds:
    return Thresholds()


@dataclass
class Classification:
    label: BottleneckClass
    diagnostic: str = ""
    warnings: list[str] = field(default_factory=list)
    inputs: dict = field(default_factory=dict)

    def to_dict(self, func_id=None) -> dict:
        return {
            "func_id": func_id,
            "class": self.label.value,
            "diagnostic": self.diagnostic,
            "warnings": list(self.warnings),
            "inputs": self.inputs,
        }


def _check_series(series: Sequence[tuple[int, float]]) -> list[tuple[int, float]]:
    pts = [(int(c), float(v)) for c, v in series]
    if len(pts) < 2:
        raise TooFewPoints("an LFMR slope needs at least two core counts")
    if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
        raise ValueError("core counts must be strictly ascending")
    return pts


def lfmr_slope_value(series: Sequence[tuple[int, float]]) -> float:
    pts = _check_series(series)
    return pts[-1][1] - pts[0][1]


def lfmr_slope(series: Sequence[tuple[int, float]], slope_delta: float = 0.15) -> SlopeClass:
    d = lfmr_slope_value(series)
    if d > slope_delta:
        return SlopeClass.INCREASING
    if d < -slope_delta:
        return SlopeClass.DECREASING
    return SlopeClass.FLAT


def classify_metrics(
    temporal: float,
    ai: float,
    mpki: float,
    lfmr: float,
    slope: SlopeClass,
    thr: Thresholds | None = None,
) -> Classification:
    """The decision tree on already-reduced inputs."""
    thr = thr or Thresholds()
    warnings = []
    if temporal < thr.temporal_thr:
        if ai >= thr.ai_thr:
            warnings.append(
                f"low temporal locality with AI {ai:.3g} >= {thr.ai_thr}: unusual for low-locality functions"
            )
        if mpki >= thr.mpki_thr and lfmr >= thr.lfmr_thr:
            label, diag = BottleneckClass.C1A, ""
        elif slope is SlopeClass.DECREASING:
            label, diag = BottleneckClass.C1C, ""
        elif lfmr >= thr.lfmr_thr:
            label, diag = BottleneckClass.C1B, ""
        else:
            label = BottleneckClass.UNCLASSIFIED
            diag = "low-T, low-MPKI, low-LFMR, non-decreasing"
    else:
        if slope is SlopeClass.INCREASING:
            label = BottleneckClass.C2A
        elif ai >= thr.ai_thr and lfmr < thr.lfmr_thr:
            label = BottleneckClass.C2C
        else:
            label = BottleneckClass.C2B
        diag = ""
    # combinations that should not occur for a feed-forward hierarchy
    if mpki >= thr.mpki_thr and lfmr < thr.lfmr_thr:
        warnings.append(f"high MPKI ({mpki:.3g}) with low LFMR ({lfmr:.3g})")
    if temporal >= thr.temporal_thr and mpki >= thr.mpki_thr and lfmr >= thr.lfmr_thr:
        warnings.append("high temporal locality with both high LFMR and high MPKI")
    return Classification(label, diag, warnings)


def classify(sweep, locality, thr: Thresholds | None = None) -> Classification:
    """Classify a function from its Host-preset scalability points.

    ``sweep`` holds ScalabilityPoint-like objects (``core_count``, ``preset``,
    ``metrics``); the smallest core count is the reference configuration.
    """
    thr = thr or Thresholds()
    points = sorted(sweep, key=lambda p: p.core_count)
    presets = {getattr(p.preset, "value", p.preset) for p in points}
    if presets - {"host"}:
        raise PresetMismatch(f"classification needs Host-preset points, got {sorted(presets)}")
    if len({p.core_count for p in points}) != len(points):
        raise ValueError("duplicate core counts in sweep")
    series = [(p.core_count, p.metrics.lfmr) for p in points]
    slope = lfmr_slope(series, thr.slope_delta)
    ref = points[0].metrics
    result = classify_metrics(locality.temporal, ref.ai, ref.mpki, ref.lfmr, slope, thr)
    result.inputs = {
        "T": locality.temporal,
        "A": ref.ai,
        "M": ref.mpki,
        "Lr": ref.lfmr,
        "slope": slope.value,
        "slope_value": lfmr_slope_value(series),
        "series": [[c, v] for c, v in series],
    }
    return result
