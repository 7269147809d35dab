"""
Caching utilities for the PerceptiveNet package.

Kernel coordinate grids depend only on the kernel size, so they are built
once per size and shared read-only.
"""

from functools import wraps

from cachetools import LRUCache
from cachetools.keys import hashkey


def create_cache(maxsize=32):
    """
    Create an LRU cache.

    Args:
        maxsize (int): Maximum number of entries

    Returns:
        LRUCache: Cache instance
    """
    return LRUCache(maxsize=maxsize)


def generate_cache_key(func_name, args, kwargs):
    """
    Generate a hashable cache key from function name and arguments.

    Args:
        func_name (str): Function name
        args (tuple): Positional arguments
        kwargs (dict): Keyword arguments

    Returns:
        tuple: Cache key, independent of keyword order
    """
    return hashkey(func_name, *args, **dict(sorted(kwargs.items())))


def cached_readonly(cache):
    """
    Decorator caching numpy results and marking them read-only.

    Args:
        cache: Cache mapping used to store results

    Returns:
        Decorator
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            key = generate_cache_key(func.__name__, args, kwargs)
            if key in cache:
                return cache[key]

            result = func(*args, **kwargs)
            for array in (result if isinstance(result, tuple) else (result,)):
                array.setflags(write=False)
            cache[key] = result
            return result

        wrapper.cache = cache
        return wrapper

    return decorator
