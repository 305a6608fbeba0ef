"""Numba switch.

Set ``EDTWK_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba is
not importable the numpy path is used regardless.
"""
import os

_FALSE = {"", "0", "false", "no", "off"}

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the env
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("EDTWK_DISABLE_NUMBA", "").strip().lower() in _FALSE


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity otherwise.

    The decorated function is always compiled lazily, so importing the package
    costs nothing when the numpy path is selected.
    """
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return numba.njit(*args, **kwargs)


def num_threads():
    """Worker count from ``EDTWK_NUM_THREADS`` (default 1)."""
    raw = os.environ.get("EDTWK_NUM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Ordered map, threaded when ``EDTWK_NUM_THREADS`` > 1."""
    items = list(items)
    n = num_threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
