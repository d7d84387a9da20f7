from typing import Optional
from .cache import GridCache
from .config import Settings

# Global instances (settings are initialized on startup)
settings: Optional[Settings] = None
grid_cache: GridCache = GridCache()
