"""Deterministic chunked execution and order-insensitive reductions.

Paths are partitioned into fixed-size chunks; each chunk simulates
independently (noise is keyed per path, never per chunk) and results are
merged positionally.  The partition depends only on the total path count,
so the worker count cannot change any output bit.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

DEFAULT_CHUNK_PATHS = 25_000
NOISE_BUDGET_BYTES = 256 * 1024 * 1024


def plan_chunks(total: int, chunk_size: int | None = None) -> list[tuple[int, int]]:
    size = chunk_size or DEFAULT_CHUNK_PATHS
    return [(lo, min(lo + size, total)) for lo in range(0, total, size)]


def block_steps(total_steps: int, chunk_paths: int, dim: int,
                budget_bytes: int = NOISE_BUDGET_BYTES) -> int:
    """Noise-block length that keeps the per-chunk buffer within budget."""
    fit = budget_bytes // (8 * max(chunk_paths, 1) * max(dim, 1))
    return int(min(total_steps, max(16, fit)))


def run_chunks(total_paths: int, worker, workers: int = 1,
               chunk_size: int | None = None) -> dict[str, np.ndarray]:
    """Run ``worker(lo, hi) -> dict of arrays`` over all chunks and merge.

    Every returned array must have leading dimension ``hi - lo``; merged
    arrays are assembled by path position, independent of completion order.
    """
    chunks = plan_chunks(total_paths, chunk_size)
    merged: dict[str, np.ndarray] = {}

    def place(bounds, result):
        lo, hi = bounds
        for key, arr in result.items():
            arr = np.asarray(arr)
            if key not in merged:
                merged[key] = np.empty((total_paths,) + arr.shape[1:], dtype=arr.dtype)
            merged[key][lo:hi] = arr

    if workers <= 1 or len(chunks) == 1:
        for bounds in chunks:
            place(bounds, worker(*bounds))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(bounds, pool.submit(worker, *bounds)) for bounds in chunks]
            for bounds, fut in futures:
                place(bounds, fut.result())
    return merged


def fsum_mean(values) -> float:
    """Exactly rounded mean: insensitive to summation order by construction."""
    vals = np.asarray(values, dtype=float).ravel()
    if len(vals) == 0:
        return math.nan
    return math.fsum(vals) / len(vals)


def mean_and_se(values) -> tuple[float, float]:
    """Sample mean and standard error of the mean, via compensated sums."""
    vals = np.asarray(values, dtype=float).ravel()
    n = len(vals)
    mean = fsum_mean(vals)
    if n < 2:
        return mean, 0.0
    var = math.fsum((vals - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def step_schedule(horizon: float, dt: float) -> tuple[int, float]:
    """Number of full steps and the remainder so the total time is exact.

    The simulation takes ``n_full`` steps of ``dt`` plus one step of the
    remainder when it is meaningfully positive.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if not dt > 0:
        raise ValueError("dt must be positive")
    n_full = int(math.floor(horizon / dt + 1e-9))
    rem = horizon - n_full * dt
    if rem <= 1e-12 * max(horizon, dt):
        rem = 0.0
    return n_full, rem
