"""Architecture-independent spatial and temporal locality over tumbling windows.

Addresses are analysed at word granularity (``addr // word_size``). Each run of
``W`` (or ``L``) consecutive references forms one window; a trailing partial
window is ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .trace import EmptyTrace, Trace

DEFAULT_W = 32
DEFAULT_L = 32


class ReuseMode(str, Enum):
    OCCURRENCES = "occurrences"
    REPETITIONS = "repetitions"


@dataclass
class StrideProfile:
    bins: dict[int, int] = field(default_factory=dict)
    skipped_windows: int = 0

    @property
    def windows(self) -> int:
        return sum(self.bins.values()) + self.skipped_windows

    def merge(self, other: "StrideProfile") -> "StrideProfile":
        bins = dict(self.bins)
        for k, v in other.bins.items():
            bins[k] = bins.get(k, 0) + v
        return StrideProfile(dict(sorted(bins.items())), self.skipped_windows + other.skipped_windows)


@dataclass
class ReuseProfile:
    bins: dict[int, int] = field(default_factory=dict)
    total_accesses: int = 0
    mode: ReuseMode = ReuseMode.OCCURRENCES

    def merge(self, other: "ReuseProfile") -> "ReuseProfile":
        if other.mode != self.mode:
            raise ValueError("cannot merge reuse profiles with different modes")
        bins = dict(self.bins)
        for k, v in other.bins.items():
            bins[k] = bins.get(k, 0) + v
        return ReuseProfile(dict(sorted(bins.items())), self.total_accesses + other.total_accesses, self.mode)


@dataclass
class LocalityProfile:
    spatial: float
    temporal: float
    stride_profile: StrideProfile
    reuse_profile: ReuseProfile
    window_w: int = DEFAULT_W
    window_l: int = DEFAULT_L

    def to_dict(self) -> dict:
        return {
            "spatial": self.spatial,
            "temporal": self.temporal,
            "window_w": self.window_w,
            "window_l": self.window_l,
            "mode": self.reuse_profile.mode.value,
            "stride_bins": [[k, v] for k, v in sorted(self.stride_profile.bins.items())],
            "reuse_bins": [[k, v] for k, v in sorted(self.reuse_profile.bins.items())],
            "skipped_windows": self.stride_profile.skipped_windows,
            "total_accesses": self.reuse_profile.total_accesses,
        }


def _windows(trace: Trace, length: int) -> np.ndarray:
    """Word addresses as a (windows, length) array, each row sorted."""
    if len(trace) == 0:
        raise EmptyTrace("locality of an empty trace is undefined")
    if length < 2:
        raise ValueError("window length must be >= 2")
    words = trace.addresses // np.uint64(trace.word_size)
    nwin = len(words) // length
    rows = words[: nwin * length].reshape(nwin, length)
    return np.sort(rows, axis=1)


def stride_profile(trace: Trace, W: int = DEFAULT_W) -> StrideProfile:
    rows = _windows(trace, W)
    if rows.shape[0] == 0:
        return StrideProfile()
    gaps = np.diff(rows, axis=1)
    # distance 0 is a repeated word, not a stride
    masked = np.where(gaps > 0, gaps, np.iinfo(np.uint64).max)
    mins = masked.min(axis=1)
    ok = mins != np.iinfo(np.uint64).max
    strides, counts = np.unique(mins[ok], return_counts=True)
    return StrideProfile(
        {int(s): int(c) for s, c in zip(strides, counts)},
        int((~ok).sum()),
    )


def _spatial_from(profile: StrideProfile) -> float:
    used = sum(profile.bins.values())
    if used == 0:
        return 0.0
    return sum((count / used) / stride for stride, count in sorted(profile.bins.items()))


def spatial_locality(trace: Trace, W: int = DEFAULT_W) -> float:
    return _spatial_from(stride_profile(trace, W))


def reuse_profile(trace: Trace, L: int = DEFAULT_L, mode: ReuseMode | str = ReuseMode.OCCURRENCES) -> ReuseProfile:
    mode = ReuseMode(mode)
    rows = _windows(trace, L)
    nwin = rows.shape[0]
    if nwin == 0:
        return ReuseProfile({}, 0, mode)
    flat = rows.ravel()
    starts = np.ones(flat.shape[0], dtype=bool)
    starts[1:] = flat[1:] != flat[:-1]
    starts[::L] = True  # runs never cross a window boundary
    pos = np.flatnonzero(starts)
    runs = np.diff(np.append(pos, flat.shape[0]))
    k = runs[runs >= 2]
    n = k if mode is ReuseMode.OCCURRENCES else k - 1
    # floor(log2 n) for positive ints, exact
    idx = np.frexp(n.astype(np.float64))[1] - 1
    bins, counts = np.unique(idx, return_counts=True)
    return ReuseProfile({int(b): int(c) for b, c in zip(bins, counts)}, int(nwin * L), mode)


def _temporal_from(profile: ReuseProfile) -> float:
    if profile.total_accesses == 0:
        return 0.0
    weighted = sum((1 << i) * count for i, count in sorted(profile.bins.items()))
    return min(1.0, max(0.0, weighted / profile.total_accesses))


def temporal_locality(trace: Trace, L: int = DEFAULT_L, mode: ReuseMode | str = ReuseMode.OCCURRENCES) -> float:
    return _temporal_from(reuse_profile(trace, L, mode))


def locality_profile(
    trace: Trace | Sequence[Trace],
    W: int = DEFAULT_W,
    L: int = DEFAULT_L,
    mode: ReuseMode | str = ReuseMode.OCCURRENCES,
) -> LocalityProfile:
    """Spatial and temporal locality of one trace, or of a bundle of streams.

    For a bundle the per-stream window histograms are summed before the
    scalar metrics are formed, so no window spans two streams.
    """
    traces: Iterable[Trace] = [trace] if isinstance(trace, Trace) else list(trace)
    mode = ReuseMode(mode)
    sp = StrideProfile()
    rp = ReuseProfile({}, 0, mode)
    seen = False
    for t in traces:
        if len(t) == 0:
            continue
        seen = True
        sp = sp.merge(stride_profile(t, W))
        rp = rp.merge(reuse_profile(t, L, mode))
    if not seen:
        raise EmptyTrace("locality of an empty trace is undefined")
    return LocalityProfile(_spatial_from(sp), _temporal_from(rp), sp, rp, W, L)
