"""Hot loops behind window classification, subset enumeration and product scans.

The compiled extension ``_core`` is used when it was built; otherwise the
numpy implementation in ``_fallback`` is loaded.  Setting the environment
variable ``TRANSLAB_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("TRANSLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

subset_longest_runs = _impl.subset_longest_runs
window_cover_table = _impl.window_cover_table


# the compiled versions take typed buffers; coerce array-likes here so both
# backends accept lists, bool arrays and non-contiguous slices alike
def longest_run(flags) -> tuple[int, int]:
    return _impl.longest_run(np.ascontiguousarray(flags, dtype=np.uint8))


def first_run(flags, length: int) -> int:
    return _impl.first_run(np.ascontiguousarray(flags, dtype=np.uint8), length)


def upward_closure_table(minimal, horizon: int) -> np.ndarray:
    return _impl.upward_closure_table(np.ascontiguousarray(minimal, dtype=np.uint64), horizon)


def sliding_max_sum(values, length: int) -> tuple[float, int]:
    return _impl.sliding_max_sum(np.ascontiguousarray(values, dtype=np.float64), length)

__all__ = [
    "BACKEND",
    "longest_run",
    "first_run",
    "subset_longest_runs",
    "window_cover_table",
    "upward_closure_table",
    "sliding_max_sum",
]
