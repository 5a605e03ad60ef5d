import threading
import time

import pytest

from seasonal_aggregate.cache import ComputationCache, get_cache


class TestComputationCache:

    def test_get_or_fetch_computes_once(self):
        cache = ComputationCache()
        calls = []

        def fetch():
            calls.append(1)
            return 42

        assert cache.get_or_fetch(("k",), fetch) == 42
        assert cache.get_or_fetch(("k",), fetch) == 42
        assert len(calls) == 1

    def test_least_recently_used_is_evicted(self):
        cache = ComputationCache(max_entries=2)
        cache.set("a", 1)
        cache.set("b", 2)
        cache.get("a")
        cache.set("c", 3)
        assert cache.get("b") is None
        assert cache.get("a") == 1
        assert cache.size() == 2

    def test_clear(self):
        cache = ComputationCache()
        cache.set("a", 1)
        cache.clear()
        assert cache.get("a") is None


def test_global_cache_is_shared():
    assert get_cache() is get_cache()


class TestConcurrentFetch:

    def test_same_key_is_computed_once(self):
        cache = ComputationCache()
        calls = []
        started = threading.Event()
        release = threading.Event()

        def fetch():
            calls.append(1)
            started.set()
            release.wait(timeout=5)
            return "gamma"

        results = []
        first = threading.Thread(target=lambda: results.append(cache.get_or_fetch(("acvf", 1), fetch)))
        first.start()
        assert started.wait(timeout=5)
        second = threading.Thread(target=lambda: results.append(cache.get_or_fetch(("acvf", 1), fetch)))
        second.start()
        time.sleep(0.05)
        release.set()
        first.join(timeout=5)
        second.join(timeout=5)

        assert results == ["gamma", "gamma"]
        assert len(calls) == 1

    def test_failed_fetch_is_retried(self):
        cache = ComputationCache()

        def broken():
            raise ValueError("quadrature failed")

        with pytest.raises(ValueError):
            cache.get_or_fetch(("normalization", 1), broken)
        assert cache.get_or_fetch(("normalization", 1), lambda: 0.5) == 0.5
        assert cache.size() == 1

    def test_cached_none_is_a_hit(self):
        cache = ComputationCache()
        calls = []

        def fetch():
            calls.append(1)

        cache.get_or_fetch("k", fetch)
        cache.get_or_fetch("k", fetch)
        assert len(calls) == 1
