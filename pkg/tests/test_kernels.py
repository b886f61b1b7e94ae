import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from translab import kernels
from translab.kernels import _fallback

try:
    from translab.kernels import _core
except ImportError:  # pragma: no cover
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled kernel not built")
flags_st = st.lists(st.integers(0, 1), max_size=200).map(lambda v: np.array(v, dtype=np.uint8))


def brute_longest(flags):
    best, start = 0, 0
    for i in range(len(flags)):
        for j in range(i, len(flags)):
            if all(flags[i:j + 1]) and j - i + 1 > best:
                best, start = j - i + 1, i + 1
    return best, start


@given(flags_st)
def test_longest_run_matches_brute_force(flags):
    assert _fallback.longest_run(flags) == brute_longest(list(flags))


@given(flags_st, st.integers(0, 12))
def test_first_run_is_first_window(flags, length):
    start = _fallback.first_run(flags, length)
    if length == 0:
        assert start == 1
    elif start:
        assert all(flags[start - 1:start - 1 + length])
        assert all(not all(flags[s:s + length]) for s in range(start - 1))
    else:
        assert brute_longest(list(flags))[0] < length


@needs_core
@given(flags_st, st.integers(0, 12))
def test_core_agrees_on_runs(flags, length):
    assert _core.longest_run(flags) == _fallback.longest_run(flags)
    assert _core.first_run(flags, length) == _fallback.first_run(flags, length)


@needs_core
@pytest.mark.parametrize("horizon", [1, 5, 10])
def test_core_agrees_on_tables(horizon):
    assert np.array_equal(_core.subset_longest_runs(horizon), _fallback.subset_longest_runs(horizon))
    for width in range(1, horizon + 1):
        assert np.array_equal(_core.window_cover_table(horizon, width),
                              _fallback.window_cover_table(horizon, width))
    gens = np.array([0b11, 0b101, 1 << (horizon - 1)], dtype=np.uint64)
    assert np.array_equal(_core.upward_closure_table(gens, horizon),
                          _fallback.upward_closure_table(gens, horizon))


@needs_core
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=80), st.integers(1, 80))
def test_core_agrees_on_sliding_sum(values, length):
    length = min(length, len(values))
    a, sa = _core.sliding_max_sum(np.array(values), length)
    b, sb = _fallback.sliding_max_sum(np.array(values), length)
    assert a == pytest.approx(b, abs=1e-9)
    assert sa == sb or a == pytest.approx(sum(values[sb - 1:sb - 1 + length]), abs=1e-9)


def test_subset_runs_match_direct_scan():
    table = kernels.subset_longest_runs(8)
    for mask in range(256):
        bits = [(mask >> i) & 1 for i in range(8)]
        assert table[mask] == brute_longest(bits)[0]


def test_window_cover_semantics():
    table = kernels.window_cover_table(6, 2)
    for mask in range(64):
        bits = [(mask >> i) & 1 for i in range(6)]
        expected = all(bits[i] or bits[i + 1] for i in range(5))
        assert bool(table[mask]) == expected


def test_horizon_bounds_rejected():
    with pytest.raises(ValueError):
        kernels.subset_longest_runs(25)
    with pytest.raises(ValueError):
        kernels.window_cover_table(4, 0)
    with pytest.raises(ValueError):
        kernels.sliding_max_sum([1.0], 2)


def test_pure_python_switch():
    code = "from translab import kernels; print(kernels.BACKEND, kernels._impl.__name__)"
    env = dict(os.environ, TRANSLAB_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["python", "translab.kernels._fallback"]
