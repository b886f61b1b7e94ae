"""Pure-Python/numpy versions of the compiled kernels (same signatures)."""
from __future__ import annotations

import numpy as np


def _check_horizon(horizon: int) -> None:
    if horizon < 1 or horizon > 24:
        raise ValueError("horizon must lie in [1, 24]")


def longest_run(flags) -> tuple[int, int]:
    best = cur = best_start = 0
    for i, f in enumerate(flags):
        if f:
            cur += 1
            if cur > best:
                best = cur
                best_start = i - cur + 2
        else:
            cur = 0
    return best, best_start


def first_run(flags, length: int) -> int:
    if length <= 0:
        return 1
    cur = 0
    for i, f in enumerate(flags):
        if f:
            cur += 1
            if cur >= length:
                return i - length + 2
        else:
            cur = 0
    return 0


def _bits(horizon: int) -> np.ndarray:
    masks = np.arange(1 << horizon, dtype=np.uint64)
    shifts = np.arange(horizon, dtype=np.uint64)
    return ((masks[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


def subset_longest_runs(horizon: int) -> np.ndarray:
    _check_horizon(horizon)
    bits = _bits(horizon)
    cur = np.zeros(bits.shape[0], dtype=np.uint8)
    best = np.zeros(bits.shape[0], dtype=np.uint8)
    for col in range(horizon):
        cur = np.where(bits[:, col] == 1, cur + 1, 0).astype(np.uint8)
        np.maximum(best, cur, out=best)
    return best


def window_cover_table(horizon: int, width: int) -> np.ndarray:
    _check_horizon(horizon)
    if width < 1:
        raise ValueError("width must be positive")
    masks = np.arange(1 << horizon, dtype=np.uint64)
    ok = np.ones(masks.shape[0], dtype=bool)
    block = np.uint64((1 << min(width, 63)) - 1) if width < 64 else np.uint64(2**64 - 1)
    for start in range(horizon - width + 1):
        ok &= ((masks >> np.uint64(start)) & block) != 0
    return ok.astype(np.uint8)


def upward_closure_table(minimal, horizon: int) -> np.ndarray:
    _check_horizon(horizon)
    masks = np.arange(1 << horizon, dtype=np.uint64)
    hit = np.zeros(masks.shape[0], dtype=bool)
    for g in np.asarray(minimal, dtype=np.uint64):
        hit |= (masks & g) == g
    return hit.astype(np.uint8)


def sliding_max_sum(values, length: int) -> tuple[float, int]:
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if length < 1 or length > n:
        raise ValueError("window length must lie in [1, len(values)]")
    csum = np.concatenate(([0.0], np.cumsum(values)))
    sums = csum[length:] - csum[:-length]
    start = int(np.argmax(sums))
    return float(sums[start]), start + 1
