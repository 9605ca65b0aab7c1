"""Shared numeric helpers: norms, sample grids, log-log slope fits and the
thread-capped parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

#: relative level below which a residual is treated as round-off noise
RESIDUAL_FLOOR = 1e-13

THREADS_ENV = "ASYMPDIAG_THREADS"


def opnorm(a):
    """Operator 2-norm of a dense matrix."""
    return float(np.linalg.norm(np.asarray(a), 2))


def default_rho_grid(lo=2.0 ** -10, hi=2.0 ** -2, count=9):
    """Log-spaced parameter grid, descending from ``hi`` to ``lo``."""
    return np.geomspace(hi, lo, count)


def residual_floor(scale):
    return RESIDUAL_FLOOR * max(1.0, float(scale))


def fit_loglog_slope(xs, ys, floor=0.0):
    """Least-squares slope of log(y) against log(x).

    Points with ``y <= floor`` are treated as round-off and excluded.
    Returns ``(slope, n_used, exact)``; ``slope`` is None and ``exact`` True
    when fewer than three points survive, i.e. the data sits at the noise
    floor.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = ys > max(floor, 0.0)
    if keep.sum() < 3:
        return None, int(keep.sum()), True
    slope = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0]
    return float(slope), int(keep.sum()), False


def thread_count():
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Order-preserving map, threaded when ASYMPDIAG_THREADS > 1."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
