"""Orbits, hitting-time sets and the sensitivity/equicontinuity dichotomy."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._parallel import pmap
from .errors import DichotomyInconclusive, ParameterError, UnsupportedOperation
from .family import ClassifyParams, WindowClassification, WindowSet, classify_window
from .operators import (
    Matrix,
    Operator,
    effective_weights,
    is_shift,
    power_norm,
    right_inverse,
)
from .sampling import make_rng, random_point_in_ball
from .vectors import SparseVector

UNDER_APPROXIMATION = "under_approximation"

# exact coefficients larger than this many bits are demoted to floats
MAX_EXACT_BITS = 4096


@dataclass(frozen=True)
class Ball:
    """Open ball ``{v : ||v - center|| < radius}``."""

    center: SparseVector
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError("ball radius must be positive")

    def contains(self, v: SparseVector) -> bool:
        return (v - self.center).norm() < self.radius

    __contains__ = contains

    def to_json(self) -> dict:
        return {"center": self.center.to_json(), "radius": self.radius}

    @classmethod
    def from_json(cls, data) -> "Ball":
        return cls(SparseVector.from_json(data["center"]), float(data["radius"]))


# ---------------------------------------------------------------------------
# orbits


@dataclass(frozen=True)
class OrbitPoint:
    n: int
    vector: SparseVector
    norm: float


@dataclass(frozen=True)
class Orbit:
    points: tuple[OrbitPoint, ...]
    overflow: bool = False

    def norms(self) -> list[float]:
        return [p.norm for p in self.points]

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)


def _too_big(v: SparseVector) -> bool:
    for c in v._entries.values():
        if isinstance(c, Fraction) and max(c.numerator.bit_length(), c.denominator.bit_length()) > MAX_EXACT_BITS:
            return True
    return False


def orbit(op: Operator, x: SparseVector, horizon: int) -> Orbit:
    """``T^n x`` for ``n = 0..H``; each term comes from the closed form."""
    if horizon < 1:
        raise ParameterError("horizon must be at least 1")
    points = []
    overflow = False
    for n in range(horizon + 1):
        v = op.iterate(x, n)
        if _too_big(v):
            overflow = True
            v = v.to_float()
        nrm = v.norm()
        overflow = overflow or math.isinf(nrm)
        points.append(OrbitPoint(n, v, nrm))
    return Orbit(tuple(points), overflow)


def orbit_norms(op: Operator, x: SparseVector, horizon: int) -> list[float]:
    return orbit(op, x, horizon).norms()


def write_series_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def export_orbit_csv(path, op: Operator, x: SparseVector, horizon: int) -> None:
    write_series_csv(path, ("n", "value"), ((p.n, p.norm) for p in orbit(op, x, horizon)))


# ---------------------------------------------------------------------------
# hitting-time sets


def hitting_point(op: Operator, x: SparseVector, V: Ball, horizon: int) -> WindowSet:
    """``{n in [1, H] : T^n x in V}``."""
    if horizon < 1:
        raise ParameterError("horizon must be at least 1")
    return WindowSet(horizon, tuple(n for n in range(1, horizon + 1) if V.contains(op.iterate(x, n))))


@dataclass(frozen=True)
class Sampler:
    """How ``T^n(U)`` is explored.

    ``grid`` tries the center and then points ``center +- s*r*e_j`` for
    ``s`` in (1/2, 9/10); ``random`` draws ``count`` seeded points of ``U``;
    ``analytic`` solves ``T^n u = c_V`` through the right inverse.
    """

    mode: str = "analytic"
    count: int = 64
    seed: int | None = None
    dim: int = 0

    def __post_init__(self):
        if self.mode not in ("grid", "random", "analytic"):
            raise ParameterError(f"unknown sampler mode {self.mode!r}")
        if self.count < 1:
            raise ParameterError("sampler count must be positive")
        if self.mode == "random" and self.seed is None:
            raise ParameterError("random sampling needs a seed")

    def to_json(self) -> dict:
        data = {"mode": self.mode}
        if self.mode != "analytic":
            data["count"] = self.count
        if self.mode == "random":
            data["seed"] = self.seed
        return data

    @classmethod
    def from_json(cls, data) -> "Sampler":
        if isinstance(data, str):
            return cls(data)
        return cls(data.get("mode", "analytic"), int(data.get("count", 64)), data.get("seed"), int(data.get("dim", 0)))


def _sample_points(U: Ball, V: Ball, sampler: Sampler) -> list[SparseVector]:
    space = U.center.space
    lo = space.first_index
    dim = sampler.dim or max(U.center.max_index, V.center.max_index, lo) - lo + 4
    if sampler.mode == "grid":
        pts = [U.center]
        for j in range(lo, lo + dim):
            for s in (Fraction(1, 2), Fraction(9, 10)):
                for sign in (1, -1):
                    step = Fraction(U.radius) * s * sign
                    pts.append(U.center + SparseVector.basis(j, space, step))
        pts = [p for p in pts if U.contains(p)]
        return pts[: sampler.count]
    rng = make_rng(sampler.seed)
    return [U.center] + [random_point_in_ball(rng, U.center, U.radius, dim) for _ in range(sampler.count - 1)]


def supports_analytic(op: Operator) -> bool:
    try:
        right_inverse(op)
    except UnsupportedOperation:
        return False
    return True


@dataclass(frozen=True)
class AnalyticHit:
    hit: bool
    point: SparseVector
    target_gap: float
    correction_norm: float


def analytic_hit(op: Operator, U: Ball, V: Ball, n: int) -> AnalyticHit:
    """Decide ``T^n(U) ∩ V ≠ ∅`` through the canonical right inverse ``R``.

    With ``t = c_V - T^n c_U`` the points ``u = c_U + a R^n t`` satisfy
    ``T^n u = T^n c_U + a t``.  Taking the largest admissible ``a`` in
    ``[0, 1]`` gives the exhibited point ``u*``; ``a = 1`` is the exact
    solution of ``T^n u = c_V``.
    """
    R = right_inverse(op)
    t = V.center - op.iterate(U.center, n)
    corr = R.iterate(t, n)
    cnorm = corr.norm()
    tnorm = t.norm()
    if cnorm < U.radius:
        alpha = Fraction(1)
    else:
        # strictly inside U: back off the boundary by a relative 2^-20
        alpha = Fraction(U.radius / cnorm) * Fraction((1 << 20) - 1, 1 << 20)
    point = U.center + corr * alpha
    gap = float(1 - alpha) * tnorm
    hit = gap < V.radius and U.contains(point)
    return AnalyticHit(hit, point, gap, cnorm)


def hitting_sets(op: Operator, U: Ball, V: Ball, horizon: int, sampler: Sampler | None = None) -> WindowSet:
    """Window of ``N(U, V) = {n : T^n(U) ∩ V ≠ ∅}``.

    Sampling modes can only under-approximate and say so in ``flags``.
    """
    sampler = sampler or Sampler()
    if horizon < 1:
        raise ParameterError("horizon must be at least 1")
    if sampler.mode == "analytic":
        if not supports_analytic(op):
            raise UnsupportedOperation("analytic hitting sets need a right inverse (shifts, differentiation)")
        hits = tuple(n for n in range(1, horizon + 1) if analytic_hit(op, U, V, n).hit)
        flags = () if _analytic_exact(op) else (UNDER_APPROXIMATION,)
        return WindowSet(horizon, hits, flags)
    pts = _sample_points(U, V, sampler)
    hits = tuple(n for n in range(1, horizon + 1) if any(V.contains(op.iterate(u, n)) for u in pts))
    return WindowSet(horizon, hits, (UNDER_APPROXIMATION,))


def _analytic_exact(op: Operator) -> bool:
    # for lam*B with constant weights the scaled correction is norm-minimal
    if not is_shift(op):
        return False
    w = effective_weights(op)
    while w.rule == "scaled":
        w = w.base
    return w.rule == "constant"


def _inverse_map(op: Operator):
    try:
        R = right_inverse(op)
        return R.iterate
    except UnsupportedOperation:
        if isinstance(op, Matrix):
            inv = _exact_inverse(op)
            if inv is not None:
                return inv.iterate
        raise


def _exact_inverse(m: Matrix) -> Matrix | None:
    d = m.dim
    aug = [list(row) + [Fraction(int(i == j)) for j in range(d)] for i, row in enumerate(m.rows)]
    for col in range(d):
        piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(d):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return Matrix(tuple(tuple(row[d:]) for row in aug))


def hitting_into_point(op: Operator, U: Ball, y: SparseVector, horizon: int) -> WindowSet:
    """``{n : R^n y in U}`` along the canonical preimage chain only.

    ``R`` is the right inverse (or the inverse of an invertible matrix); the
    true ``N(U, y)`` can be larger, hence the under-approximation flag.
    """
    step = _inverse_map(op)
    hits = tuple(n for n in range(1, horizon + 1) if U.contains(step(y, n)))
    return WindowSet(horizon, hits, (UNDER_APPROXIMATION,))


# ---------------------------------------------------------------------------
# transitivity evidence

LEVELS = ("none", "transitive", "weakly_mixing", "mixing")


@dataclass(frozen=True)
class TransitivityReport:
    pair: tuple[Ball, Ball]
    hitting: WindowSet
    verdicts: WindowClassification
    evidence_level: str

    def to_json(self) -> dict:
        return {
            "pair": [self.pair[0].to_json(), self.pair[1].to_json()],
            "horizon": self.hitting.horizon,
            "hitting_members": list(self.hitting.members),
            "flags": list(self.hitting.flags),
            "verdicts": self.verdicts.to_json(),
            "evidence_level": self.evidence_level,
        }


def evidence_level(hitting: WindowSet, verdicts: WindowClassification) -> str:
    if verdicts.cofinite.is_consistent:
        return "mixing"
    if verdicts.thick.is_consistent:
        return "weakly_mixing"
    if len(hitting):
        return "transitive"
    return "none"


def transitivity_report(op: Operator, pairs: Sequence[tuple[Ball, Ball]], horizon: int = 200,
                        params: ClassifyParams | None = None, sampler: Sampler | None = None
                        ) -> list[TransitivityReport]:
    if not pairs:
        raise ParameterError("need at least one pair of balls")
    params = params or ClassifyParams.defaults(horizon)

    def one(pair):
        hit = hitting_sets(op, pair[0], pair[1], horizon, sampler)
        verdicts = classify_window(hit, params)
        return TransitivityReport(tuple(pair), hit, verdicts, evidence_level(hit, verdicts))

    return pmap(one, pairs)


def overall_evidence(reports: Sequence[TransitivityReport]) -> str:
    """The level every pair supports: the weakest per-pair level."""
    if not reports:
        return "none"
    return min((r.evidence_level for r in reports), key=LEVELS.index)


def random_ball_pairs(seed: int, count: int, max_index: int = 4, space=None,
                      radii: tuple[float, float] = (0.05, 0.5)) -> list[tuple[Ball, Ball]]:
    """Seeded battery of ball pairs with rational centers."""
    from .sampling import random_vector
    from .vectors import LP2

    space = space or LP2
    rng = make_rng(seed)
    out = []
    for _ in range(count):
        balls = []
        for _ in range(2):
            c = random_vector(rng, max_index, space)
            r = float(rng.uniform(*radii))
            balls.append(Ball(c, r))
        out.append((balls[0], balls[1]))
    return out


# ---------------------------------------------------------------------------
# dichotomy


@dataclass(frozen=True)
class Sensitive:
    delta: float
    eps: float
    n: int
    x: SparseVector
    image_norm: float
    profile: tuple[float, ...] = field(default=(), repr=False)

    kind = "sensitive"

    def to_json(self) -> dict:
        return {"kind": self.kind, "delta": self.delta, "eps": self.eps, "n": self.n,
                "x": self.x.to_json(), "image_norm": self.image_norm}


@dataclass(frozen=True)
class Equicontinuous:
    bound: float
    profile: tuple[float, ...] = field(default=(), repr=False)

    kind = "equicontinuous"

    def to_json(self) -> dict:
        return {"kind": self.kind, "bound": self.bound}


def _norm_witness(op: Operator, n: int, scale: Fraction) -> SparseVector:
    """Vector of norm ``scale`` whose n-th image attains ``||T^n||``."""
    if is_shift(op):
        start = power_norm(op, n).argmax
        return SparseVector.basis(start + n, scale=scale)
    if isinstance(op, Matrix):
        _, _, vh = np.linalg.svd(np.linalg.matrix_power(op.as_array(), n))
        top = vh[0].conj()
        vec = SparseVector({i + 1: complex(v) for i, v in enumerate(top) if abs(v) > 0})
        return vec * (float(scale) / vec.norm())
    raise UnsupportedOperation(f"no norm witness for {type(op).__name__}")


def dichotomy(op: Operator, horizon: int = 64, delta_grid: Sequence[float] = (1.0,),
              eps_grid: Sequence[float] | None = None):
    """Sensitive (with a checked witness) or Equicontinuous (with a bound).

    Sensitivity is tested at the hardest grid corner: the smallest ``eps``
    and the largest ``delta``.  The witness is ``x = (eps/2) e_j`` at the
    first ``n`` where ``||T^n|| * eps / 2 >= delta``.  Equicontinuity is
    reported when the norm profile (with ``||T^0|| = 1``) shows no growth
    over the second half of the horizon and every value is stabilized.
    """
    if not delta_grid or not (eps_grid is None or len(eps_grid)):
        raise ParameterError("grids must be nonempty")
    eps_grid = list(eps_grid) if eps_grid is not None else [2.0**-m for m in range(1, 11)]
    if horizon < 2:
        raise ParameterError("horizon must be at least 2")
    eps = min(eps_grid)
    delta = max(delta_grid)
    if eps <= 0 or delta <= 0:
        raise ParameterError("eps and delta must be positive")
    norms = [power_norm(op, n) for n in range(1, horizon + 1)]
    profile = tuple(p.value for p in norms)

    half_eps = Fraction(eps) / 2
    for n, pn in enumerate(norms, start=1):
        if pn.value * float(half_eps) >= delta:
            x = _norm_witness(op, n, half_eps)
            image = op.iterate(x, n)
            ok = _check_sensitive(x, image, Fraction(eps), Fraction(delta))
            if not ok:
                raise DichotomyInconclusive(f"sensitivity witness at n={n} failed validation", list(profile))
            return Sensitive(delta, eps, n, x, image.norm(), profile)

    first = max([1.0, *profile[: horizon // 2]])
    second = max(profile[horizon // 2:])
    if second <= first and all(p.stabilized for p in norms):
        return Equicontinuous(max(1.0, *profile), profile)
    raise DichotomyInconclusive(
        f"norms of powers grow (max {max(profile):g}) but stay below delta/(eps/2) within H={horizon}",
        list(profile))


def _check_sensitive(x: SparseVector, image: SparseVector, eps: Fraction, delta: Fraction) -> bool:
    if x.is_exact() and image.is_exact() and len(x) == 1 and len(image) == 1:
        # single-coordinate vectors: compare absolute values exactly
        (xv,), (iv,) = x._entries.values(), image._entries.values()
        return abs(xv) < eps and abs(iv) >= delta
    return x.norm() < eps and image.norm() >= delta
