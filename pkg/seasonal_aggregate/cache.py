"""
Computation cache for expensive spectral quantities.
Avoids recomputing normalization constants and autocovariances.
"""

import logging
import threading
from collections import OrderedDict
from typing import Any, Callable, Dict, Hashable, Optional

logger = logging.getLogger(__name__)


class ComputationCache:
    """
    Thread-safe in-memory cache bounded by entry count.

    Caches:
    - Normalization constants of limiting aggregate spectra
    - Autocovariance sequences derived from model spectra

    Entries are evicted least-recently-used first; nothing expires by time,
    so results never depend on the wall clock.
    """

    def __init__(self, max_entries: int = 256):
        """
        Initialize cache.

        Args:
            max_entries: Maximum number of stored values (default: 256)
        """
        self.max_entries = max_entries
        self._cache: "OrderedDict[Hashable, Any]" = OrderedDict()
        self._lock = threading.Lock()
        self._pending: Dict[Hashable, threading.Event] = {}

    def get(self, key: Hashable) -> Optional[Any]:
        """
        Get value from cache.

        Args:
            key: Cache key

        Returns:
            Cached value or None if not found
        """
        with self._lock:
            if key not in self._cache:
                return None
            self._cache.move_to_end(key)
            return self._cache[key]

    def set(self, key: Hashable, value: Any) -> None:
        """
        Store a value, evicting the least recently used entry when full.

        Args:
            key: Cache key
            value: Value to cache
        """
        with self._lock:
            self._cache[key] = value
            self._cache.move_to_end(key)
            while len(self._cache) > self.max_entries:
                self._cache.popitem(last=False)

    def get_or_fetch(self, key: Hashable, fetch_func: Callable[[], Any]) -> Any:
        """
        Get value from cache or compute it if not cached.

        Concurrent callers asking for the same missing key wait for the first
        caller's computation instead of repeating it. When that computation
        raises, the next waiter computes the value itself.

        Args:
            key: Cache key
            fetch_func: Function to call to compute the value if not cached

        Returns:
            Cached or freshly computed value
        """
        while True:
            with self._lock:
                if key in self._cache:
                    self._cache.move_to_end(key)
                    logger.debug("cache hit for %s", _describe(key))
                    return self._cache[key]
                pending = self._pending.get(key)
                if pending is None:
                    pending = self._pending[key] = threading.Event()
                    break
            pending.wait()

        try:
            value = fetch_func()
            self.set(key, value)
        finally:
            with self._lock:
                del self._pending[key]
            pending.set()
        return value

    def clear(self) -> None:
        """Clear entire cache."""
        with self._lock:
            self._cache.clear()

    def size(self) -> int:
        """Get number of items in cache."""
        with self._lock:
            return len(self._cache)


def _describe(key: Hashable) -> str:
    if isinstance(key, tuple) and key:
        return str(key[0])
    return type(key).__name__


# Global cache instance
_global_cache: Optional[ComputationCache] = None
_cache_lock = threading.Lock()


def get_cache() -> ComputationCache:
    """
    Get the global computation cache instance.

    Returns:
        ComputationCache instance
    """
    global _global_cache

    if _global_cache is None:
        with _cache_lock:
            if _global_cache is None:
                _global_cache = ComputationCache()

    return _global_cache
