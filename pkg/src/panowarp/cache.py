from typing import Optional, Dict, Any, Callable, Hashable
from dataclasses import dataclass
import threading
import time

# ==================== GRID CACHE ====================

@dataclass
class CacheEntry:
    """One cached lookup grid and when it was last used."""
    data: Any
    timestamp: float

    def touch(self) -> None:
        self.timestamp = time.monotonic()


class GridCache:
    """Memoizes projection lookup grids (pixel directions, e2c/c2e maps, view rays).

    Grids depend only on sizes, field of view and rotation, so PNVI steps and
    dataset items reuse them. Arrays handed out are read-only.
    """

    def __init__(self, max_entries: int = 64):
        self.max_entries = max_entries
        self.entries: Dict[Hashable, CacheEntry] = {}
        self._lock = threading.Lock()

        # Statistics for the timing report
        self.stats = {
            "hits": 0,
            "misses": 0,
            "evictions": 0,
        }

    def get(self, key: Hashable, build: Callable[[], Any]) -> Any:
        """Return the grid for `key`, building it on a miss."""
        with self._lock:
            entry = self.entries.get(key)
            if entry is not None:
                entry.touch()
                self.stats["hits"] += 1
                return entry.data
            self.stats["misses"] += 1

        # Built outside the lock; two threads may race to build the same grid,
        # both results are identical.
        data = _freeze(build())
        with self._lock:
            self.entries[key] = CacheEntry(data=data, timestamp=time.monotonic())
            self._cleanup()
        return data

    def invalidate(self, key: Optional[Hashable] = None) -> None:
        """Drop one grid, or everything when `key` is None."""
        with self._lock:
            if key is None:
                self.entries.clear()
            else:
                self.entries.pop(key, None)

    def _cleanup(self) -> None:
        """Evict least recently used grids above the size cap."""
        if len(self.entries) <= self.max_entries:
            return
        sorted_entries = sorted(self.entries.items(), key=lambda x: x[1].timestamp)
        excess = len(self.entries) - self.max_entries
        for key, _ in sorted_entries[:excess]:
            del self.entries[key]
        self.stats["evictions"] += excess


def _freeze(data: Any) -> Any:
    """Mark numpy arrays (also inside tuples) read-only."""
    if hasattr(data, "setflags"):
        data.setflags(write=False)
    elif isinstance(data, tuple):
        for item in data:
            _freeze(item)
    return data
