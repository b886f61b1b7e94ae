# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled window and product-scan kernels.

Positions are 1-based in every returned index; bit ``i`` of a mask stands
for the integer ``i + 1``.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint8_t, uint64_t

cnp.import_array()


def longest_run(const uint8_t[:] flags):
    cdef Py_ssize_t i, n = flags.shape[0]
    cdef Py_ssize_t cur = 0, best = 0, best_start = 0
    for i in range(n):
        if flags[i]:
            cur += 1
            if cur > best:
                best = cur
                best_start = i - cur + 2
        else:
            cur = 0
    return int(best), int(best_start)


def first_run(const uint8_t[:] flags, Py_ssize_t length):
    cdef Py_ssize_t i, n = flags.shape[0]
    cdef Py_ssize_t cur = 0
    if length <= 0:
        return 1
    for i in range(n):
        if flags[i]:
            cur += 1
            if cur >= length:
                return int(i - length + 2)
        else:
            cur = 0
    return 0


def subset_longest_runs(int horizon):
    if horizon < 1 or horizon > 24:
        raise ValueError("horizon must lie in [1, 24]")
    cdef uint64_t total = (<uint64_t>1) << horizon
    cdef uint64_t mask
    cdef int bit, cur, best
    out = np.zeros(total, dtype=np.uint8)
    cdef uint8_t[:] view = out
    for mask in range(total):
        cur = 0
        best = 0
        for bit in range(horizon):
            if (mask >> bit) & 1:
                cur += 1
                if cur > best:
                    best = cur
            else:
                cur = 0
        view[mask] = best
    return out


def window_cover_table(int horizon, int width):
    if horizon < 1 or horizon > 24:
        raise ValueError("horizon must lie in [1, 24]")
    if width < 1:
        raise ValueError("width must be positive")
    cdef uint64_t total = (<uint64_t>1) << horizon
    cdef uint64_t mask, block
    cdef int start, ok
    out = np.zeros(total, dtype=np.uint8)
    cdef uint8_t[:] view = out
    if width >= 64:
        block = <uint64_t>0xFFFFFFFFFFFFFFFF
    else:
        block = ((<uint64_t>1) << width) - 1
    for mask in range(total):
        ok = 1
        for start in range(horizon - width + 1):
            if (mask >> start) & block == 0:
                ok = 0
                break
        view[mask] = ok
    return out


def upward_closure_table(const uint64_t[:] minimal, int horizon):
    if horizon < 1 or horizon > 24:
        raise ValueError("horizon must lie in [1, 24]")
    cdef uint64_t total = (<uint64_t>1) << horizon
    cdef uint64_t mask, g
    cdef Py_ssize_t k, m = minimal.shape[0]
    out = np.zeros(total, dtype=np.uint8)
    cdef uint8_t[:] view = out
    for mask in range(total):
        for k in range(m):
            g = minimal[k]
            if mask & g == g:
                view[mask] = 1
                break
    return out


def sliding_max_sum(const double[:] values, Py_ssize_t length):
    cdef Py_ssize_t n = values.shape[0], i
    cdef double cur = 0.0, best
    cdef Py_ssize_t best_start = 1
    if length < 1 or length > n:
        raise ValueError("window length must lie in [1, len(values)]")
    for i in range(length):
        cur += values[i]
    best = cur
    for i in range(length, n):
        cur += values[i] - values[i - length]
        if cur > best:
            best = cur
            best_start = i - length + 2
    return float(best), int(best_start)
