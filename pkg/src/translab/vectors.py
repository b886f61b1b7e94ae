"""Finitely supported vectors: the state space for every operator model.

Two spaces are modelled.  ``lp`` holds sequences ``(x_1, x_2, ...)`` with
1-based indices and the usual p-norm.  ``poly`` holds Taylor coefficient
vectors ``c_0 + c_1 z + ...`` of entire functions, keyed by degree, with the
seminorm ``sup |f(z)|`` over ``|z| = radius`` sampled at ``grid`` angles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping

import numpy as np

Scalar = Fraction | float | complex


def as_scalar(value) -> Scalar:
    """Coerce user input to an exact Fraction where possible.

    Strings like ``"1/2"`` and ints become Fractions, floats and complex
    numbers pass through unchanged.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (float, complex)):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, Number):
        return complex(value) if isinstance(value, complex) else float(value)
    raise TypeError(f"cannot interpret {value!r} as a scalar")


def scalar_to_json(value: Scalar):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return float(value)


def _abs_float(value: Scalar) -> float:
    try:
        return float(abs(value))
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Space:
    kind: str = "lp"
    p: float = 2.0
    radius: float = 1.0
    grid: int = 64

    def __post_init__(self):
        if self.kind not in ("lp", "poly"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "lp" and not 1 <= self.p < math.inf:
            raise ValueError("p must lie in [1, inf)")
        if self.kind == "poly" and (self.radius <= 0 or self.grid < 8):
            raise ValueError("poly space needs radius > 0 and grid >= 8")

    @property
    def first_index(self) -> int:
        return 1 if self.kind == "lp" else 0

    def to_json(self) -> dict:
        if self.kind == "lp":
            return {"kind": "lp", "p": self.p}
        return {"kind": "poly", "radius": self.radius, "grid": self.grid}

    @classmethod
    def from_json(cls, data: Mapping) -> "Space":
        kind = data.get("kind", "lp")
        if kind == "lp":
            return cls("lp", p=float(data.get("p", 2.0)))
        return cls("poly", radius=float(data.get("radius", 1.0)), grid=int(data.get("grid", 64)))


LP2 = Space()


def poly_space(radius: float = 1.0, grid: int = 64) -> Space:
    return Space("poly", radius=radius, grid=grid)


class SparseVector:
    """Immutable finitely supported vector; zero entries are never stored."""

    __slots__ = ("_entries", "space")

    def __init__(self, entries: Mapping[int, object] | Iterable = (), space: Space = LP2):
        items = entries.items() if isinstance(entries, Mapping) else entries
        clean: dict[int, Scalar] = {}
        lo = space.first_index
        for index, value in items:
            index = int(index)
            if index < lo:
                raise ValueError(f"index {index} below {lo} in {space.kind} space")
            value = as_scalar(value)
            if value != 0:
                clean[index] = value
        self._entries = dict(sorted(clean.items()))
        self.space = space

    # -- construction -------------------------------------------------
    @classmethod
    def basis(cls, index: int, space: Space = LP2, scale=1) -> "SparseVector":
        return cls({index: scale}, space)

    @classmethod
    def zero(cls, space: Space = LP2) -> "SparseVector":
        return cls({}, space)

    @classmethod
    def _raw(cls, entries: dict, space: Space) -> "SparseVector":
        vec = cls.__new__(cls)
        vec._entries = dict(sorted((k, v) for k, v in entries.items() if v != 0))
        vec.space = space
        return vec

    # -- mapping protocol -----------------------------------------------
    def __getitem__(self, index: int) -> Scalar:
        return self._entries.get(index, 0)

    def items(self):
        return self._entries.items()

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(self._entries)

    @property
    def max_index(self) -> int:
        """Largest stored index, or ``first_index - 1`` for the zero vector."""
        return max(self._entries) if self._entries else self.space.first_index - 1

    def is_zero(self) -> bool:
        return not self._entries

    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self._entries.values())

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "SparseVector") -> None:
        if not isinstance(other, SparseVector):
            raise TypeError("expected a SparseVector")
        if other.space.kind != self.space.kind:
            raise ValueError("vectors live in different spaces")

    def __add__(self, other: "SparseVector") -> "SparseVector":
        self._check(other)
        out = dict(self._entries)
        for k, v in other._entries.items():
            out[k] = out.get(k, 0) + v
        return SparseVector._raw(out, self.space)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-other)

    def __neg__(self) -> "SparseVector":
        return SparseVector._raw({k: -v for k, v in self._entries.items()}, self.space)

    def __mul__(self, alpha) -> "SparseVector":
        alpha = as_scalar(alpha)
        return SparseVector._raw({k: alpha * v for k, v in self._entries.items()}, self.space)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.space.kind == other.space.kind and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self.space.kind, tuple(self._entries.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in self._entries.items())
        return f"SparseVector({{{body}}}, {self.space.kind})"

    def truncate(self, max_index: int) -> "SparseVector":
        return SparseVector._raw(
            {k: v for k, v in self._entries.items() if k <= max_index}, self.space
        )

    def to_float(self) -> "SparseVector":
        out = {}
        for k, v in self._entries.items():
            try:
                out[k] = v if isinstance(v, complex) else float(v)
            except OverflowError:
                out[k] = math.inf if v > 0 else -math.inf
        return SparseVector._raw(out, self.space)

    # -- norms --------------------------------------------------------------
    def norm(self) -> float:
        if not self._entries:
            return 0.0
        if self.space.kind == "lp":
            mags = [_abs_float(v) for v in self._entries.values()]
            top = max(mags)
            if top == 0.0:
                return 0.0
            if math.isinf(top):
                return math.inf
            p = self.space.p
            # scale by the largest entry so tiny and huge entries stay finite
            return top * math.fsum((m / top) ** p for m in mags) ** (1.0 / p)
        return self.circle_values().max()

    def circle_values(self, grid: int | None = None, radius: float | None = None) -> np.ndarray:
        """|f(z)| at ``grid`` equally spaced points of ``|z| = radius`` (poly space)."""
        if self.space.kind != "poly":
            raise ValueError("circle sampling is defined for polynomial vectors only")
        grid = grid or self.space.grid
        radius = self.space.radius if radius is None else radius
        z = radius * np.exp(2j * np.pi * np.arange(grid) / grid)
        if not self._entries:
            return np.zeros(grid)
        degree = max(self._entries)
        coeffs = np.zeros(degree + 1, dtype=complex)
        for k, v in self._entries.items():
            try:
                coeffs[k] = complex(v)
            except OverflowError:
                coeffs[k] = math.inf
        return np.abs(np.polyval(coeffs[::-1], z))

    def distance(self, other: "SparseVector") -> float:
        return (self - other).norm()

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "entries": {str(k): scalar_to_json(v) for k, v in self._entries.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SparseVector":
        space = Space.from_json(data.get("space", {}))
        return cls({int(k): v for k, v in data.get("entries", {}).items()}, space)
