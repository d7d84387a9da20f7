from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import json
import os
import time

from . import instances
from .config import resolve_threads
from .models import CameraPose
from .rasters import DepthMap, EquirectImage
from .warp import cvs_warp

# ==================== STAGE TIMER ====================

@dataclass
class StageTimer:
    """Wall-clock seconds per named stage; repeated stages accumulate."""
    stages: Dict[str, float] = field(default_factory=dict)
    _start: float = field(default_factory=time.perf_counter)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.stages[name] = self.stages.get(name, 0.0) + (time.perf_counter() - t0)

    @property
    def total_sec(self) -> float:
        return time.perf_counter() - self._start

    def report(self, threads: Optional[int] = None) -> dict:
        return {
            "stages": {k: round(v, 6) for k, v in self.stages.items()},
            "total_sec": round(self.total_sec, 6),
            "threads": resolve_threads(threads),
            "cache": dict(instances.grid_cache.stats),
        }

    def write(self, path: Union[str, Path], threads: Optional[int] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.report(threads), indent=2) + "\n")
        return path

# ==================== WARP BENCHMARK ====================

def benchmark_warp(image: EquirectImage, depth: DepthMap, pose: CameraPose,
                   thread_counts: Optional[Sequence[int]] = None, repeats: int = 3) -> List[dict]:
    """Best-of-`repeats` cvs_warp time per thread count, with speedup over 1 thread."""
    if thread_counts is None:
        n = os.cpu_count() or 1
        thread_counts = sorted({1, 2, 4, n})
    # Warm the direction grid so the first row does not pay for it.
    cvs_warp(image, depth, pose, threads=1)

    rows = []
    baseline = None
    for threads in thread_counts:
        best = float("inf")
        for _ in range(max(1, repeats)):
            t0 = time.perf_counter()
            cvs_warp(image, depth, pose, threads=threads)
            best = min(best, time.perf_counter() - t0)
        if baseline is None:
            baseline = best
        rows.append({
            "threads": threads,
            "seconds": round(best, 6),
            "speedup": round(baseline / best, 3) if best > 0 else None,
        })
    return rows
