"""
Tests for the cache utilities.
"""

import numpy as np
import pytest

from perceptivenet.utils.cache import cached_readonly, create_cache, generate_cache_key


class TestCache:
    """Tests for the cache utilities."""

    def test_create_cache(self):
        """Test create_cache function."""
        cache = create_cache()
        assert cache.maxsize == 32

        cache = create_cache(maxsize=4)
        assert cache.maxsize == 4

    def test_generate_cache_key(self):
        """Test generate_cache_key function."""
        key1 = generate_cache_key("grid", (), {})
        key2 = generate_cache_key("grid", (7,), {})
        key3 = generate_cache_key("grid", (9,), {})
        assert key1 != key2
        assert key2 != key3
        assert key2 == generate_cache_key("grid", (7,), {})

        # keyword order does not matter
        key4 = generate_cache_key("grid", (7,), {"a": 1, "b": 2})
        key5 = generate_cache_key("grid", (7,), {"b": 2, "a": 1})
        assert key4 == key5

    def test_cached_readonly_reuses_results(self):
        """Test cached_readonly returns the same object for repeated calls."""
        calls = []

        @cached_readonly(create_cache())
        def ramp(n):
            calls.append(n)
            return np.arange(n, dtype=np.float64)

        first = ramp(5)
        second = ramp(5)
        assert first is second
        assert calls == [5]

        ramp(6)
        assert calls == [5, 6]
        assert len(ramp.cache) == 2

    def test_cached_readonly_marks_arrays_readonly(self):
        """Test cached arrays, including tuple members, cannot be written."""
        @cached_readonly(create_cache())
        def pair(n):
            return np.zeros(n), np.ones(n)

        a, b = pair(3)
        with pytest.raises(ValueError):
            a[0] = 1.0
        with pytest.raises(ValueError):
            b[0] = 0.0

    def test_cache_evicts_least_recently_used(self):
        """Test the cache keeps at most maxsize entries."""
        @cached_readonly(create_cache(maxsize=2))
        def grid(n):
            return np.zeros(n)

        for n in (1, 2, 3):
            grid(n)
        assert len(grid.cache) == 2
        assert generate_cache_key("grid", (1,), {}) not in grid.cache
