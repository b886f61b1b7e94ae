"""Concrete operator models with exact closed-form powers.

Sequence-space operators act on ``lp`` vectors (1-based), the differential
operators act on polynomial coefficient vectors.  Weight products are exact
``Fraction`` arithmetic whenever the weights are rational.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import ParameterError, UnsupportedOperation
from .vectors import LP2, Scalar, SparseVector, Space, as_scalar, poly_space, scalar_to_json


def example21_position(k: int) -> int:
    """Index of the k-th small weight ``1/2**k`` in the block pattern."""
    return k * (k + 3) // 2


def example21_block_index(j: int) -> int:
    """Return k if ``j`` is the position of the k-th small weight, else 0."""
    disc = 9 + 8 * j
    s = math.isqrt(disc)
    if s * s == disc and (s - 3) % 2 == 0 and s > 3:
        return (s - 3) // 2
    return 0


class WeightSequence:
    """Nonzero bounded weights ``w_1, w_2, ...`` with cached prefix products.

    ``explicit`` repeats its last entry beyond the given list, ``constant``
    is ``lambda`` everywhere, ``example21`` is the block pattern
    ``2, 1/2, 2, 2, 1/4, 2, 2, 2, 1/8, ...`` with the k-th small weight at
    ``k(k+3)/2``, and ``scaled`` multiplies another sequence by a scalar.
    """

    RULES = ("explicit", "constant", "example21", "scaled")

    def __init__(self, rule: str, values: Sequence = (), factor=None, base: "WeightSequence | None" = None):
        if rule not in self.RULES:
            raise ParameterError(f"unknown weight rule {rule!r}")
        self.rule = rule
        self.values = tuple(as_scalar(v) for v in values)
        self.factor = None if factor is None else as_scalar(factor)
        self.base = base
        if rule == "explicit" and not self.values:
            raise ParameterError("explicit weights need at least one value")
        if rule in ("constant", "scaled") and self.factor is None:
            raise ParameterError(f"{rule} weights need a factor")
        if rule == "scaled" and base is None:
            raise ParameterError("scaled weights need a base sequence")
        if any(v == 0 for v in self.values) or self.factor == 0:
            raise ParameterError("weights must be nonzero")
        self._prefix: list[Scalar] = [Fraction(1)]

    @classmethod
    def explicit(cls, values: Sequence) -> "WeightSequence":
        return cls("explicit", values)

    @classmethod
    def constant(cls, lam) -> "WeightSequence":
        return cls("constant", factor=lam)

    @classmethod
    def example21(cls) -> "WeightSequence":
        return cls("example21")

    def scaled(self, lam) -> "WeightSequence":
        return WeightSequence("scaled", factor=lam, base=self)

    def __call__(self, j: int) -> Scalar:
        if j < 1:
            raise ParameterError("weights are indexed from 1")
        if self.rule == "constant":
            return self.factor
        if self.rule == "explicit":
            return self.values[min(j, len(self.values)) - 1]
        if self.rule == "example21":
            k = example21_block_index(j)
            return Fraction(1, 2**k) if k else Fraction(2)
        return self.factor * self.base(j)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightSequence):
            return NotImplemented
        return (self.rule, self.values, self.factor, self.base) == (
            other.rule, other.values, other.factor, other.base)

    def __hash__(self) -> int:
        return hash((self.rule, self.values, self.factor, self.base))

    def __repr__(self) -> str:
        if self.rule == "explicit":
            return f"WeightSequence.explicit({list(self.values)})"
        if self.rule == "constant":
            return f"WeightSequence.constant({self.factor})"
        if self.rule == "scaled":
            return f"{self.base!r}.scaled({self.factor})"
        return "WeightSequence.example21()"

    def sup_abs(self) -> float:
        if self.rule == "constant":
            return float(abs(self.factor))
        if self.rule == "explicit":
            return max(float(abs(v)) for v in self.values)
        if self.rule == "example21":
            return 2.0
        return float(abs(self.factor)) * self.base.sup_abs()

    def prefix(self, n: int) -> Scalar:
        """Exact product ``w_1 ... w_n`` (1 for ``n = 0``)."""
        if n < 0:
            raise ParameterError("prefix length must be nonnegative")
        cache = self._prefix
        while len(cache) <= n:
            cache.append(cache[-1] * self(len(cache)))
        return cache[n]

    def window_product(self, start: int, length: int) -> Scalar:
        """Exact ``w_start * ... * w_{start+length-1}``."""
        if length == 0:
            return Fraction(1)
        if self.rule == "constant":
            return self.factor**length
        if self.rule == "scaled":
            return self.factor**length * self.base.window_product(start, length)
        return self.prefix(start + length - 1) / self.prefix(start - 1)

    def log2_abs(self, count: int) -> np.ndarray:
        return np.array([math.log2(abs(self(j))) for j in range(1, count + 1)], dtype=np.float64)

    def to_json(self) -> dict:
        if self.rule == "explicit":
            return {"rule": "explicit", "values": [scalar_to_json(v) for v in self.values]}
        if self.rule == "constant":
            return {"rule": "constant", "lambda": scalar_to_json(self.factor)}
        if self.rule == "scaled":
            return {"rule": "scaled", "lambda": scalar_to_json(self.factor), "base": self.base.to_json()}
        return {"rule": "example21"}

    @classmethod
    def from_json(cls, data) -> "WeightSequence":
        if isinstance(data, str):
            data = {"rule": data}
        if not isinstance(data, Mapping):
            raise ParameterError(f"malformed weight description {data!r}")
        rule = data.get("rule")
        if rule == "example21":
            return cls.example21()
        if rule == "constant":
            return cls.constant(data["lambda"])
        if rule == "explicit":
            values = data.get("values")
            if not isinstance(values, list):
                raise ParameterError("explicit weights need a list of values")
            return cls.explicit(values)
        if rule == "scaled":
            return cls.from_json(data["base"]).scaled(data["lambda"])
        raise ParameterError(f"unknown weight rule {rule!r}")


def weight_products(w: WeightSequence, n: int) -> Scalar:
    """Exact product of the first ``n`` weights."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    return w.prefix(n)


# ---------------------------------------------------------------------------
# operator models


class Operator:
    """Common surface of the operator models."""

    space_kind = "lp"
    dense_generalized_kernel = False

    def apply(self, x: SparseVector) -> SparseVector:
        raise NotImplementedError

    def iterate(self, x: SparseVector, n: int) -> SparseVector:
        raise NotImplementedError

    def _check_vector(self, x: SparseVector) -> None:
        if x.space.kind != self.space_kind:
            raise ParameterError(f"{type(self).__name__} acts on {self.space_kind} vectors")

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class BackwardShift(Operator):
    """``B_w(x_1, x_2, ...) = (w_1 x_2, w_2 x_3, ...)``."""

    weights: WeightSequence = field(default_factory=lambda: WeightSequence.constant(1))
    dense_generalized_kernel = True

    def apply(self, x):
        self._check_vector(x)
        return SparseVector._raw({j - 1: self.weights(j - 1) * v for j, v in x.items() if j > 1}, x.space)

    def iterate(self, x, n):
        self._check_vector(x)
        _check_power(n)
        if n == 0:
            return x
        w = self.weights
        return SparseVector._raw(
            {m - n: w.window_product(m - n, n) * v for m, v in x.items() if m > n}, x.space
        )

    def to_json(self):
        return {"kind": "backward_shift", "weights": self.weights.to_json()}


@dataclass(frozen=True)
class ForwardShift(Operator):
    """``S_{1/w}(x_1, x_2, ...) = (0, x_1/w_1, x_2/w_2, ...)``."""

    weights: WeightSequence = field(default_factory=lambda: WeightSequence.constant(1))

    def apply(self, x):
        self._check_vector(x)
        return SparseVector._raw({j + 1: v / self.weights(j) for j, v in x.items()}, x.space)

    def iterate(self, x, n):
        self._check_vector(x)
        _check_power(n)
        if n == 0:
            return x
        w = self.weights
        return SparseVector._raw({m + n: v / w.window_product(m, n) for m, v in x.items()}, x.space)

    def to_json(self):
        return {"kind": "forward_shift", "weights": self.weights.to_json()}


@dataclass(frozen=True)
class ScalarMultiple(Operator):
    """``lam * inner`` for a shift ``inner``."""

    lam: Scalar = Fraction(2)
    inner: Operator = field(default_factory=BackwardShift)

    def __post_init__(self):
        object.__setattr__(self, "lam", as_scalar(self.lam))
        if not isinstance(self.inner, (BackwardShift, ForwardShift)):
            raise ParameterError("ScalarMultiple only wraps shift operators")
        if self.lam == 0:
            raise ParameterError("scalar must be nonzero")

    @property
    def dense_generalized_kernel(self):  # type: ignore[override]
        return self.inner.dense_generalized_kernel

    def apply(self, x):
        return self.inner.apply(x) * self.lam

    def iterate(self, x, n):
        _check_power(n)
        return self.inner.iterate(x, n) * (self.lam**n)

    def to_json(self):
        return {"kind": "scalar_multiple", "lambda": scalar_to_json(self.lam), "inner": self.inner.to_json()}


@dataclass(frozen=True)
class Differentiation(Operator):
    """``D f = f'`` on Taylor coefficients."""

    space_kind = "poly"
    dense_generalized_kernel = True

    def apply(self, x):
        self._check_vector(x)
        return SparseVector._raw({m - 1: m * c for m, c in x.items() if m >= 1}, x.space)

    def iterate(self, x, n):
        self._check_vector(x)
        _check_power(n)
        return SparseVector._raw({m - n: math.perm(m, n) * c for m, c in x.items() if m >= n}, x.space)

    def to_json(self):
        return {"kind": "differentiation"}


@dataclass(frozen=True)
class Integration(Operator):
    """``S f(z) = integral of f from 0 to z``; the right inverse of ``D``."""

    space_kind = "poly"

    def apply(self, x):
        self._check_vector(x)
        return SparseVector._raw({m + 1: c / Fraction(m + 1) for m, c in x.items()}, x.space)

    def iterate(self, x, n):
        self._check_vector(x)
        _check_power(n)
        # S^n z^m = m! z^(m+n) / (m+n)!
        return SparseVector._raw({m + n: c / Fraction(math.perm(m + n, n)) for m, c in x.items()}, x.space)

    def to_json(self):
        return {"kind": "integration"}


@dataclass(frozen=True)
class Translation(Operator):
    """``T_a f(z) = f(z + a)`` on polynomials."""

    a: Scalar = Fraction(1)
    space_kind = "poly"

    def __post_init__(self):
        object.__setattr__(self, "a", as_scalar(self.a))

    @staticmethod
    def _shift(x: SparseVector, a) -> SparseVector:
        out: dict[int, Scalar] = {}
        for m, c in x.items():
            for i in range(m + 1):
                out[i] = out.get(i, 0) + c * math.comb(m, i) * a ** (m - i)
        return SparseVector._raw(out, x.space)

    def apply(self, x):
        self._check_vector(x)
        return self._shift(x, self.a)

    def iterate(self, x, n):
        self._check_vector(x)
        _check_power(n)
        return x if n == 0 else self._shift(x, self.a * n)

    def to_json(self):
        return {"kind": "translation", "a": scalar_to_json(self.a)}


@dataclass(frozen=True)
class Matrix(Operator):
    """A small square matrix acting on ``lp`` vectors supported in ``1..d``."""

    rows: tuple = ((Fraction(1),),)

    def __post_init__(self):
        rows = tuple(tuple(as_scalar(v) for v in row) for row in self.rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ParameterError("matrix must be square and nonempty")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def identity(cls, d: int) -> "Matrix":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def dense_generalized_kernel(self):  # type: ignore[override]
        # finite dimensional: the generalized kernel is dense iff M is nilpotent
        return all(v == 0 for row in _mat_pow(self.rows, self.dim) for v in row)

    def apply(self, x):
        return self._mul(self.rows, x)

    def _mul(self, rows, x):
        self._check_vector(x)
        if x.max_index > self.dim:
            raise ParameterError(f"vector support exceeds matrix dimension {self.dim}")
        out = {}
        for i, row in enumerate(rows, start=1):
            acc = 0
            for j, v in x.items():
                acc = acc + row[j - 1] * v
            out[i] = acc
        return SparseVector._raw(out, x.space)

    def iterate(self, x, n):
        _check_power(n)
        return self._mul(_mat_pow(self.rows, n), x)

    def as_array(self) -> np.ndarray:
        return np.array([[complex(v) for v in row] for row in self.rows])

    def to_json(self):
        return {"kind": "matrix", "rows": [[scalar_to_json(v) for v in row] for row in self.rows]}


def _mat_mul(a, b):
    d = len(a)
    return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(d)), Fraction(0)) for j in range(d)) for i in range(d))


def _mat_pow(rows, n):
    d = len(rows)
    result = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    base = rows
    while n:
        if n & 1:
            result = _mat_mul(result, base)
        base = _mat_mul(base, base)
        n >>= 1
    return result


def _check_power(n: int) -> None:
    if n < 0:
        raise ParameterError("power must be nonnegative")


def rolewicz(lam=2) -> ScalarMultiple:
    """``lam * B`` with unit weights."""
    return ScalarMultiple(as_scalar(lam), BackwardShift(WeightSequence.constant(1)))


def example21_shift() -> BackwardShift:
    return BackwardShift(WeightSequence.example21())


def apply(op: Operator, x: SparseVector) -> SparseVector:
    return op.apply(x)


def iterate(op: Operator, x: SparseVector, n: int) -> SparseVector:
    return op.iterate(x, n)


def is_shift(op: Operator) -> bool:
    return isinstance(op, BackwardShift) or (
        isinstance(op, ScalarMultiple) and isinstance(op.inner, BackwardShift))


def effective_weights(op: Operator) -> WeightSequence:
    """Weights of ``op`` viewed as a single weighted backward shift."""
    if isinstance(op, BackwardShift):
        return op.weights
    if isinstance(op, ScalarMultiple) and isinstance(op.inner, BackwardShift):
        return op.inner.weights.scaled(op.lam)
    raise UnsupportedOperation(f"{type(op).__name__} is not a weighted backward shift")


def right_inverse(op: Operator) -> Operator:
    """Canonical right inverse: ``S_{1/w}``, ``(1/lam) S_{1/w}`` or integration."""
    if isinstance(op, BackwardShift):
        return ForwardShift(op.weights)
    if isinstance(op, ScalarMultiple) and isinstance(op.inner, BackwardShift):
        return ScalarMultiple(1 / op.lam, ForwardShift(op.inner.weights))
    if isinstance(op, Differentiation):
        return Integration()
    raise UnsupportedOperation(f"{type(op).__name__} has no canonical right inverse")


def default_space(op: Operator) -> Space:
    return poly_space() if op.space_kind == "poly" else LP2


# ---------------------------------------------------------------------------
# norms of powers


@dataclass(frozen=True)
class PowerNorm:
    value: float
    stabilized: bool
    argmax: int = 0

    @property
    def lower_bound_only(self) -> bool:
        return not self.stabilized


def power_norm(op: Operator, n: int, index_range: int = 4096, p: float = 2.0) -> PowerNorm:
    """Operator norm of ``op**n``.

    For shifts this is ``sup_j |w_j ... w_{j+n-1}|`` scanned over the first
    ``index_range`` starting indices; the value is flagged as a lower bound
    unless the sup over the first half of the range already attains it.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    if isinstance(op, ScalarMultiple):
        inner = power_norm(op.inner, n, index_range, p)
        return PowerNorm(float(abs(op.lam)) ** n * inner.value, inner.stabilized, inner.argmax)
    if isinstance(op, (BackwardShift, ForwardShift)):
        w = op.weights
        if w.rule == "constant":
            mag = abs(w.factor) ** n if isinstance(op, BackwardShift) else abs(1 / w.factor) ** n
            return PowerNorm(float(mag), True, 1)
        logs = w.log2_abs(index_range + n - 1)
        if isinstance(op, ForwardShift):
            logs = -logs
        best, start = kernels.sliding_max_sum(logs, n)
        half = max(n, (index_range + n - 1) // 2)
        best_half, _ = kernels.sliding_max_sum(logs[:half], n)
        exact = abs(w.window_product(start, n))
        if isinstance(op, ForwardShift):
            exact = 1 / exact
        try:
            value = float(exact)
        except OverflowError:
            value = math.inf
        return PowerNorm(value, bool(best_half >= best), start)
    if isinstance(op, Matrix):
        mat = np.linalg.matrix_power(op.as_array(), n)
        if p == 2.0:
            value = float(np.linalg.norm(mat, 2))
        elif p == 1.0:
            value = float(np.abs(mat).sum(axis=0).max())
        else:
            value = _power_method_norm(mat)
        return PowerNorm(value, True, 0)
    raise UnsupportedOperation(f"power_norm is not defined for {type(op).__name__}")


def _power_method_norm(mat: np.ndarray, iterations: int = 1000, tol: float = 1e-10) -> float:
    gram = mat.conj().T @ mat
    v = np.ones(gram.shape[0], dtype=complex) / math.sqrt(gram.shape[0])
    est = 0.0
    for _ in range(iterations):
        u = gram @ v
        nrm = np.linalg.norm(u)
        if nrm == 0:
            return 0.0
        v = u / nrm
        if abs(nrm - est) < tol:
            break
        est = nrm
    return float(math.sqrt(est))


# ---------------------------------------------------------------------------
# preimages


@dataclass(frozen=True)
class NotSurjectiveEvidence:
    """The canonical preimage candidate fails a p-norm Cauchy test.

    This is evidence, never proof: over the last half of the truncation
    the candidate carries p-mass at least ``bound`` while ``y`` itself
    carries at most ``bound * 2**-10``.
    """

    candidate: SparseVector
    tail_mass: float
    bound: float
    depth: int
    heavy: tuple[tuple[int, Scalar], ...] = ()


TAIL_RATIO = 2.0**-10


def preimage(op: Operator, y: SparseVector, depth: int = 512, divergence_bound: float = 0.5):
    """Canonical preimage (free first coordinate 0) or non-surjectivity evidence."""
    if not is_shift(op):
        raise UnsupportedOperation("preimage is defined for weighted backward shifts")
    if depth < 2:
        raise ParameterError("depth must be at least 2")
    y = y.truncate(depth)
    candidate = right_inverse(op).apply(y)
    p = y.space.p
    start = depth // 2
    tail = [(j, v) for j, v in candidate.items() if j > start]
    mass = math.fsum(float(abs(v)) ** p for _, v in tail)
    # y itself must look like a member of the space: negligible tail mass
    y_mass = math.fsum(float(abs(v)) ** p for j, v in y.items() if j > start)
    if mass >= divergence_bound and y_mass <= divergence_bound * TAIL_RATIO:
        heavy = tuple((j, v) for j, v in tail if abs(v) >= 1)
        return NotSurjectiveEvidence(candidate, mass, divergence_bound, depth, heavy)
    return candidate


def surjectivity_probe(op: Operator, depth: int = 512) -> SparseVector:
    """``y_j = w_j`` wherever ``|w_j| < 1`` (effective weights), else 0.

    If infinitely many weights are small but summable in p-th power, ``y``
    lies in the space while its canonical preimage has a 1 at each ``j+1``.
    """
    w = effective_weights(op)
    return SparseVector({j: w(j) for j in range(1, depth + 1) if abs(w(j)) < 1}, LP2)


# ---------------------------------------------------------------------------
# serialization

_KINDS = {
    "backward_shift", "forward_shift", "scalar_multiple", "differentiation",
    "integration", "translation", "matrix",
}


def operator_from_json(data: Mapping) -> Operator:
    if not isinstance(data, Mapping) or data.get("kind") not in _KINDS:
        raise ParameterError(f"malformed operator description {data!r}")
    kind = data["kind"]
    if kind == "backward_shift":
        return BackwardShift(WeightSequence.from_json(data.get("weights", {"rule": "constant", "lambda": 1})))
    if kind == "forward_shift":
        return ForwardShift(WeightSequence.from_json(data.get("weights", {"rule": "constant", "lambda": 1})))
    if kind == "scalar_multiple":
        return ScalarMultiple(as_scalar(data["lambda"]), operator_from_json(data["inner"]))
    if kind == "differentiation":
        return Differentiation()
    if kind == "integration":
        return Integration()
    if kind == "translation":
        return Translation(as_scalar(data.get("a", 1)))
    return Matrix(tuple(tuple(r) for r in data["rows"]))
