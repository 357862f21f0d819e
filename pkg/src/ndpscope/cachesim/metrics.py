from __future__ import annotations

from dataclasses import asdict, dataclass

from .stats import CacheStats


class DivisionGuard(ZeroDivisionError):
    code = "DivisionGuard"


@dataclass(frozen=True)
class FunctionMetrics:
    ai: float
    mpki: float
    lfmr: float
    core_count: int = 1
    spatial: float = 0.0
    temporal: float = 0.0
    lfmr_flagged: bool = False  # True when LFMR is defined by convention (single-level hierarchy)

    def to_dict(self) -> dict:
        return asdict(self)


def metrics(stats: CacheStats, locality=None, core_count: int | None = None) -> FunctionMetrics:
    """AI, LLC MPKI and LFMR from demand counters.

    AI is ALU operations per L1 demand access, MPKI is LLC demand misses per
    thousand instructions, LFMR is LLC demand misses over L1 demand misses. A
    single-level hierarchy has no L2/L3 to absorb misses, so its LFMR is 1 and
    flagged.
    """
    if stats.total_instructions <= 0:
        raise DivisionGuard("no instructions retired")
    l1 = stats.l1
    if l1.accesses <= 0:
        raise DivisionGuard("no L1 accesses")
    llc_misses = stats.llc.misses
    if len(stats.levels) == 1:
        lfmr, flagged = 1.0, True
    else:
        lfmr = llc_misses / l1.misses if l1.misses else 0.0
        flagged = False
    return FunctionMetrics(
        ai=stats.total_alu_ops / l1.accesses,
        mpki=1000.0 * llc_misses / stats.total_instructions,
        lfmr=lfmr,
        core_count=stats.core_count if core_count is None else core_count,
        spatial=0.0 if locality is None else locality.spatial,
        temporal=0.0 if locality is None else locality.temporal,
        lfmr_flagged=flagged,
    )
