"""Seeded random vectors with exact rational coefficients."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .vectors import LP2, SparseVector, Space


def make_rng(seed: int | None) -> np.random.Generator:
    if seed is None:
        raise ParameterError("a seed is required for sampling")
    return np.random.default_rng(seed)


def random_vector(rng: np.random.Generator, max_index: int, space: Space = LP2,
                  denominator: int = 8, scale: int = 1) -> SparseVector:
    """Nonzero vector on ``first_index .. first_index + max_index - 1``.

    Coefficients are multiples of ``1/denominator`` in ``[-scale, scale]``.
    """
    if max_index < 1:
        raise ParameterError("max_index must be positive")
    lo = space.first_index
    while True:
        size = int(rng.integers(1, max_index + 1))
        idx = rng.choice(max_index, size=size, replace=False) + lo
        nums = rng.integers(-scale * denominator, scale * denominator + 1, size=size)
        vec = SparseVector({int(i): Fraction(int(v), denominator) for i, v in zip(idx, nums)}, space)
        if not vec.is_zero():
            return vec


def random_point_in_ball(rng: np.random.Generator, center: SparseVector, radius: float,
                         max_index: int, denominator: int = 1 << 20) -> SparseVector:
    """Rational point strictly inside ``Ball(center, radius)``."""
    direction = random_vector(rng, max_index, center.space, denominator=64)
    dnorm = direction.norm()
    frac = float(rng.random()) ** (1.0 / max_index)
    s = Fraction(0.98 * radius * frac / dnorm).limit_denominator(denominator)
    point = center + direction * s
    while (point - center).norm() >= radius:
        s /= 2
        point = center + direction * s
    return point
