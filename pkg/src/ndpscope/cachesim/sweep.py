from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Mapping, Sequence

from .. import model
from ..trace import Trace
from .config import HierarchyConfig, Preset, preset
from .engine import DEFAULT_GRANULARITY, simulate_multicore
from .metrics import metrics

DEFAULT_PRESETS = (Preset.HOST, Preset.HOST_PF, Preset.NDP)


def scalability_sweep(
    bundles: Mapping[int, Sequence[Trace]],
    hierarchies: Sequence[HierarchyConfig] | None = None,
    locality=None,
    granularity: int = DEFAULT_GRANULARITY,
    jobs: int = 1,
    cpi_base: float | None = None,
) -> list[model.ScalabilityPoint]:
    """Simulate every (preset, core count) pair and attach model estimates.

    Points come back ordered by preset (as given) then ascending core count.
    Throughput is normalised to the Host preset at the smallest core count
    (or to the first hierarchy there when Host is absent).
    """
    if not bundles:
        raise ValueError("no bundles to sweep")
    if cpi_base is None:
        cpi_base = model.CPI_BASE
    hierarchies = list(hierarchies) if hierarchies else [preset(p) for p in DEFAULT_PRESETS]
    counts = sorted(bundles)
    tasks = [(h, c) for h in hierarchies for c in counts]

    def run(task):
        h, c = task
        return simulate_multicore(bundles[c], h, granularity)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    raw = []
    for (h, c), st in zip(tasks, results):
        a = model.amat(st, h)
        raw.append((h, c, st, a, model.throughput_ipc(st, a, c, h, cpi_base)))

    ref = next((r for r in raw if r[0].preset_name is Preset.HOST and r[1] == counts[0]), raw[0])
    baseline = ref[4]
    points = []
    for h, c, st, a, ipc in raw:
        points.append(
            model.ScalabilityPoint(
                core_count=c,
                preset=h.preset_name.value,
                metrics=metrics(st, locality, c),
                amat_cycles=a,
                energy=model.energy(st, h),
                rel_throughput=ipc / baseline,
                throughput_ipc=ipc,
                stats=st,
            )
        )
    return points


def by_preset(points: Sequence[model.ScalabilityPoint], name) -> list[model.ScalabilityPoint]:
    key = Preset.parse(name).value
    return sorted((p for p in points if p.preset == key), key=lambda p: p.core_count)
