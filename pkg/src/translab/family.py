"""Furstenberg families seen through a finite window ``[1, H]``.

Membership of an infinite set in a family is not decidable from finitely
many terms, so every test returns a three-valued :class:`Verdict` that
carries its evidence.  The window rules are:

* cofinite: the tail ``[ceil(theta*H), H]`` lies in the set;
* thick(L): the set contains a run of ``L`` consecutive integers;
* syndetic(g): no gap of more than ``g`` consecutive non-members, counting
  the stretches before the first and after the last member;
* infinite: the set has a member in the tail.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import kernels
from .errors import HorizonMismatch, ParameterError


class VerdictValue(str, enum.Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    value: VerdictValue
    evidence: str = ""
    witness: object = None

    def __post_init__(self):
        if self.value is VerdictValue.INCONSISTENT and self.witness is None:
            raise ValueError("an Inconsistent verdict needs a concrete witness")

    @classmethod
    def consistent(cls, evidence: str = "", witness=None) -> "Verdict":
        return cls(VerdictValue.CONSISTENT, evidence, witness)

    @classmethod
    def inconsistent(cls, evidence: str, witness) -> "Verdict":
        return cls(VerdictValue.INCONSISTENT, evidence, witness)

    @classmethod
    def inconclusive(cls, evidence: str = "", witness=None) -> "Verdict":
        return cls(VerdictValue.INCONCLUSIVE, evidence, witness)

    @property
    def is_consistent(self) -> bool:
        return self.value is VerdictValue.CONSISTENT

    @property
    def is_inconsistent(self) -> bool:
        return self.value is VerdictValue.INCONSISTENT

    @property
    def is_inconclusive(self) -> bool:
        return self.value is VerdictValue.INCONCLUSIVE

    def to_json(self) -> dict:
        return {"value": self.value.value, "evidence": self.evidence}


def conjoin(verdicts: Iterable[Verdict], label: str = "") -> Verdict:
    """All-of combination: a concrete failure wins over uncertainty."""
    verdicts = list(verdicts)
    for v in verdicts:
        if v.is_inconsistent:
            return Verdict.inconsistent(f"{label}{v.evidence}", v.witness)
    for v in verdicts:
        if v.is_inconclusive:
            return Verdict.inconclusive(f"{label}{v.evidence}", v.witness)
    return Verdict.consistent(f"{label}all {len(verdicts)} checks consistent")


# ---------------------------------------------------------------------------
# window sets


@dataclass(frozen=True)
class WindowSet:
    """A subset of ``[1, horizon]``."""

    horizon: int
    members: tuple[int, ...] = ()
    flags: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.horizon < 1:
            raise ParameterError("horizon must be positive")
        members = tuple(sorted(set(int(m) for m in self.members)))
        if members and (members[0] < 1 or members[-1] > self.horizon):
            raise ParameterError(f"members must lie in [1, {self.horizon}]")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, members: Iterable[int], horizon: int, flags: Sequence[str] = ()) -> "WindowSet":
        return cls(horizon, tuple(members), tuple(flags))

    @classmethod
    def clipped(cls, members: Iterable[int], horizon: int) -> "WindowSet":
        return cls(horizon, tuple(m for m in members if 1 <= m <= horizon))

    @classmethod
    def interval(cls, lo: int, hi: int, horizon: int) -> "WindowSet":
        return cls(horizon, tuple(range(max(lo, 1), min(hi, horizon) + 1)))

    @classmethod
    def full(cls, horizon: int) -> "WindowSet":
        return cls.interval(1, horizon, horizon)

    @classmethod
    def from_mask(cls, mask: int, horizon: int) -> "WindowSet":
        return cls(horizon, tuple(i + 1 for i in range(horizon) if mask >> i & 1))

    def __contains__(self, n: int) -> bool:
        return n in self._set

    @property
    def _set(self) -> frozenset:
        cached = self.__dict__.get("_cached_set")
        if cached is None:
            cached = frozenset(self.members)
            object.__setattr__(self, "_cached_set", cached)
        return cached

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.horizon, dtype=np.uint8)
        if self.members:
            out[np.asarray(self.members) - 1] = 1
        return out

    @property
    def mask(self) -> int:
        return sum(1 << (m - 1) for m in self.members)

    def complement(self) -> "WindowSet":
        s = self._set
        return WindowSet(self.horizon, tuple(n for n in range(1, self.horizon + 1) if n not in s))

    def issubset(self, other: "WindowSet") -> bool:
        return self._set <= other._set

    def intersection(self, other: "WindowSet") -> "WindowSet":
        return WindowSet(min(self.horizon, other.horizon), tuple(self._set & other._set))

    def union(self, other: "WindowSet") -> "WindowSet":
        return WindowSet(max(self.horizon, other.horizon), tuple(self._set | other._set))

    def restrict(self, horizon: int) -> "WindowSet":
        return WindowSet(horizon, tuple(m for m in self.members if m <= horizon))

    def shift(self, i: int) -> "WindowSet":
        """``(A + i) ∩ [1, H]``; for ``i < 0`` the horizon shrinks to ``H + i``.

        Shifting left loses knowledge of the last ``|i|`` positions, so the
        result only claims what the window actually determines.
        """
        if i >= 0:
            return WindowSet(self.horizon, tuple(m + i for m in self.members if m + i <= self.horizon))
        h = self.horizon + i
        if h < 1:
            raise ParameterError("shift leaves an empty window")
        return WindowSet(h, tuple(m + i for m in self.members if 1 <= m + i <= h))

    def thicken(self, n: int) -> "WindowSet":
        """``(A + [-n, n]) ∩ [1, H]``."""
        out = set()
        for m in self.members:
            out.update(range(max(1, m - n), min(self.horizon, m + n) + 1))
        return WindowSet(self.horizon, tuple(out))

    def interior(self, n: int) -> "WindowSet":
        """Largest ``B`` with ``(B + [-n, n]) ∩ [1, H] ⊆ A``."""
        s = self._set
        keep = [m for m in range(1, self.horizon + 1)
                if all(j in s for j in range(max(1, m - n), min(self.horizon, m + n) + 1))]
        return WindowSet(self.horizon, tuple(keep))

    def to_json(self) -> dict:
        return {"horizon": self.horizon, "members": list(self.members)}

    @classmethod
    def from_json(cls, data: Mapping) -> "WindowSet":
        return cls(int(data["horizon"]), tuple(int(m) for m in data.get("members", ())))


# ---------------------------------------------------------------------------
# window classification


@dataclass(frozen=True)
class ClassifyParams:
    thick_run: int
    syndetic_gap: int
    theta: float = 0.5

    @classmethod
    def defaults(cls, horizon: int) -> "ClassifyParams":
        return cls(max(1, math.isqrt(horizon)), max(1, math.ceil(math.sqrt(horizon))), 0.5)

    def check(self, horizon: int) -> None:
        if horizon < 1:
            raise ParameterError("empty window")
        if not 1 <= self.thick_run <= horizon:
            raise ParameterError(f"thick run {self.thick_run} must lie in [1, {horizon}]")
        if not 0 <= self.syndetic_gap <= horizon:
            raise ParameterError(f"syndetic gap {self.syndetic_gap} must lie in [0, {horizon}]")
        if not 0 < self.theta < 1:
            raise ParameterError("theta must lie in (0, 1)")


class WindowClassification(NamedTuple):
    cofinite: Verdict
    thick: Verdict
    syndetic: Verdict

    def to_json(self) -> dict:
        return {k: v.to_json() for k, v in self._asdict().items()}


def tail_start(horizon: int, theta: float) -> int:
    return max(1, math.ceil(theta * horizon))


def cofinite_verdict(A: WindowSet, theta: float) -> Verdict:
    start = tail_start(A.horizon, theta)
    for n in range(start, A.horizon + 1):
        if n not in A:
            return Verdict.inconsistent(f"{n} missing from tail [{start}, {A.horizon}]", n)
    return Verdict.consistent(f"tail [{start}, {A.horizon}] contained")


def thick_verdict(A: WindowSet, run: int) -> Verdict:
    flags = A.indicator()
    start = kernels.first_run(flags, run)
    if start:
        return Verdict.consistent(f"first run of {run} starts at {start}", start)
    longest, at = kernels.longest_run(flags)
    return Verdict.inconsistent(f"longest run {longest} (at {at}) < {run}", {"longest_run": longest, "start": at})


def syndetic_verdict(A: WindowSet, gap: int) -> Verdict:
    flags = 1 - A.indicator()
    longest, at = kernels.longest_run(flags)
    if longest <= gap:
        return Verdict.consistent(f"largest gap {longest} <= {gap}", longest)
    return Verdict.inconsistent(
        f"gap of {longest} non-members starting at {at} exceeds {gap}", {"gap": longest, "start": at})


def classify_window(A: WindowSet, params: ClassifyParams | None = None) -> WindowClassification:
    params = params or ClassifyParams.defaults(A.horizon)
    params.check(A.horizon)
    return WindowClassification(
        cofinite_verdict(A, params.theta),
        thick_verdict(A, params.thick_run),
        syndetic_verdict(A, params.syndetic_gap),
    )


# ---------------------------------------------------------------------------
# index sequences for tail filters


@dataclass(frozen=True)
class IndexSequence:
    """Strictly increasing positive integers ``n_1 < n_2 < ...``.

    Rules: ``example21`` gives ``k(k+3)/2``, ``squares`` gives ``k**2``,
    ``all`` gives ``k``, ``explicit`` lists the values.  ``offset`` is added
    to every term; terms below 1 are dropped.
    """

    rule: str = "all"
    values: tuple[int, ...] = ()
    offset: int = 0

    def __post_init__(self):
        if self.rule not in ("explicit", "example21", "squares", "all"):
            raise ParameterError(f"unknown index rule {self.rule!r}")
        vals = tuple(int(v) for v in self.values)
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ParameterError("index sequence must be strictly increasing")
        object.__setattr__(self, "values", vals)

    def _raw(self, k: int) -> int:
        if self.rule == "example21":
            return k * (k + 3) // 2
        if self.rule == "squares":
            return k * k
        return k

    def upto(self, horizon: int) -> list[int]:
        if self.rule == "explicit":
            out = [v + self.offset for v in self.values]
        else:
            out = []
            k = 1
            while self._raw(k) + self.offset <= horizon:
                out.append(self._raw(k) + self.offset)
                k += 1
        return [v for v in out if 1 <= v <= horizon]

    def to_json(self) -> dict:
        data: dict = {"rule": self.rule}
        if self.rule == "explicit":
            data["values"] = list(self.values)
        if self.offset:
            data["offset"] = self.offset
        return data

    @classmethod
    def from_json(cls, data) -> "IndexSequence":
        if isinstance(data, list):
            return cls("explicit", tuple(data))
        return cls(data.get("rule", "explicit"), tuple(data.get("values", ())), int(data.get("offset", 0)))


# ---------------------------------------------------------------------------
# families


class FamilyDescriptor:
    """Window-level view of a Furstenberg family."""

    kind = "abstract"

    def membership(self, A: WindowSet) -> Verdict:
        raise NotImplementedError

    def dual_membership(self, A: WindowSet) -> Verdict:
        raise NotImplementedError

    def minimal_masks(self, horizon: int) -> list[int]:
        """Bitmasks whose upward closure is the window family (oracle use)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Cofinite(FamilyDescriptor):
    theta: float = 0.5
    kind = "cofinite"

    def membership(self, A):
        return cofinite_verdict(A, self.theta)

    def dual_membership(self, A):
        start = tail_start(A.horizon, self.theta)
        late = [m for m in A.members if m >= start]
        if late:
            return Verdict.consistent(f"member {late[0]} in tail meets every cofinite set", late[0])
        return Verdict.inconsistent(f"no member in tail [{start}, {A.horizon}]",
                                    WindowSet.interval(start, A.horizon, A.horizon))

    def minimal_masks(self, horizon):
        return [WindowSet.interval(tail_start(horizon, self.theta), horizon, horizon).mask]

    def to_json(self):
        return {"kind": self.kind, "theta": self.theta}


@dataclass(frozen=True)
class Infinite(FamilyDescriptor):
    theta: float = 0.5
    kind = "infinite"

    def membership(self, A):
        return Cofinite(self.theta).dual_membership(A)

    def dual_membership(self, A):
        return cofinite_verdict(A, self.theta)

    def minimal_masks(self, horizon):
        return [1 << (n - 1) for n in range(tail_start(horizon, self.theta), horizon + 1)]

    def to_json(self):
        return {"kind": self.kind, "theta": self.theta}


@dataclass(frozen=True)
class Thick(FamilyDescriptor):
    run: int | None = None
    kind = "thick"

    def length(self, horizon: int) -> int:
        return self.run if self.run is not None else max(1, math.isqrt(horizon))

    def membership(self, A):
        return thick_verdict(A, self.length(A.horizon))

    def dual_membership(self, A):
        # meets every run of L consecutive integers <=> gaps of at most L - 1
        return syndetic_verdict(A, self.length(A.horizon) - 1)

    def minimal_masks(self, horizon):
        L = self.length(horizon)
        return [WindowSet.interval(s, s + L - 1, horizon).mask for s in range(1, horizon - L + 2)]

    def to_json(self):
        return {"kind": self.kind, "run": self.run}


@dataclass(frozen=True)
class Syndetic(FamilyDescriptor):
    bound: int | None = None
    kind = "syndetic"

    def gap(self, horizon: int) -> int:
        return self.bound if self.bound is not None else max(1, math.ceil(math.sqrt(horizon)))

    def membership(self, A):
        return syndetic_verdict(A, self.gap(A.horizon))

    def dual_membership(self, A):
        # meets every syndetic(g) set <=> complement not syndetic <=> run of g + 1
        return thick_verdict(A, self.gap(A.horizon) + 1)

    def minimal_masks(self, horizon):
        raise NotImplementedError("syndetic windows are enumerated by a cover test")

    def to_json(self):
        return {"kind": self.kind, "bound": self.bound}


@dataclass(frozen=True)
class TailFilter(FamilyDescriptor):
    """``{A : {n_k : k >= k0} ⊆ A for some k0}``.

    In a window the anchor ``n_{k0}`` must satisfy ``n_{k0} <= theta*H``.
    """

    indices: IndexSequence = field(default_factory=IndexSequence)
    theta: float = 0.5
    kind = "tail_filter"

    def anchors(self, horizon: int) -> list[int]:
        seq = self.indices.upto(horizon)
        return [i for i, n in enumerate(seq) if n <= self.theta * horizon]

    def _tails(self, horizon: int) -> list[WindowSet]:
        seq = self.indices.upto(horizon)
        return [WindowSet(horizon, tuple(seq[i:])) for i in self.anchors(horizon)]

    def membership(self, A):
        tails = self._tails(A.horizon)
        if not tails:
            return Verdict.inconclusive(f"no n_k <= {self.theta}*{A.horizon} to anchor the tail")
        for tail in tails:
            if tail.issubset(A):
                return Verdict.consistent(f"tail from n_k0 = {tail.members[0]} contained", tail.members[0])
        last = tails[-1]
        missing = next(n for n in last.members if n not in A)
        return Verdict.inconsistent(f"n_k = {missing} missing after the last anchor {last.members[0]}", missing)

    def dual_membership(self, A):
        tails = self._tails(A.horizon)
        if not tails:
            return Verdict.inconclusive("no anchored tail inside the window")
        smallest = tails[-1]
        hit = [n for n in smallest.members if n in A]
        if hit:
            return Verdict.consistent(f"meets every anchored tail at {hit[0]}", hit[0])
        return Verdict.inconsistent("misses the last anchored tail", smallest)

    def minimal_masks(self, horizon):
        return [t.mask for t in self._tails(horizon)]

    def to_json(self):
        return {"kind": self.kind, "indices": self.indices.to_json(), "theta": self.theta}


def _check_generator_horizon(A: WindowSet, gens: Sequence[WindowSet]) -> None:
    for g in gens:
        if g.horizon > A.horizon:
            raise HorizonMismatch(f"generator horizon {g.horizon} exceeds window horizon {A.horizon}")


@dataclass(frozen=True)
class UpwardClosure(FamilyDescriptor):
    generators: tuple[WindowSet, ...] = ()
    kind = "upward_closure"

    def membership(self, A):
        _check_generator_horizon(A, self.generators)
        for i, g in enumerate(self.generators):
            if g.issubset(A):
                return Verdict.consistent(f"contains generator #{i}", i)
        if not self.generators:
            return Verdict.inconclusive("family has no generators")
        return Verdict.inconsistent("contains no generator", self.generators[0])

    def dual_membership(self, A):
        _check_generator_horizon(A, self.generators)
        for i, g in enumerate(self.generators):
            if not (g._set & A._set):
                return Verdict.inconsistent(f"disjoint from generator #{i}", g)
        return Verdict.consistent(f"meets all {len(self.generators)} generators")

    def minimal_masks(self, horizon):
        return [g.mask for g in self.generators if g.horizon <= horizon]

    def to_json(self):
        return {"kind": self.kind, "generators": [g.to_json() for g in self.generators]}


@dataclass(frozen=True)
class GeneratedFilter(UpwardClosure):
    """Filter generated by a decreasing chain ``F_1 ⊇ F_2 ⊇ ...``."""

    kind = "generated_filter"

    def __post_init__(self):
        for k, (a, b) in enumerate(zip(self.generators, self.generators[1:]), start=1):
            if not b.issubset(a):
                raise ParameterError(f"chain is not decreasing: F_{k + 1} not contained in F_{k}")

    @property
    def chain(self) -> tuple[WindowSet, ...]:
        return self.generators

    def to_json(self):
        return {"kind": self.kind, "chain": [g.to_json() for g in self.generators]}


def family_from_json(data: Mapping) -> FamilyDescriptor:
    kind = data.get("kind") if isinstance(data, Mapping) else None
    if kind == "cofinite":
        return Cofinite(float(data.get("theta", 0.5)))
    if kind == "infinite":
        return Infinite(float(data.get("theta", 0.5)))
    if kind == "thick":
        return Thick(data.get("run"))
    if kind == "syndetic":
        return Syndetic(data.get("bound"))
    if kind == "tail_filter":
        return TailFilter(IndexSequence.from_json(data["indices"]), float(data.get("theta", 0.5)))
    if kind == "upward_closure":
        return UpwardClosure(tuple(WindowSet.from_json(g) for g in data["generators"]))
    if kind == "generated_filter":
        return generated_filter([WindowSet.from_json(g) for g in data["chain"]])
    raise ParameterError(f"unknown family description {data!r}")


# ---------------------------------------------------------------------------
# operations


def window_membership(A: WindowSet, F: FamilyDescriptor) -> Verdict:
    return F.membership(A)


def dual_membership(A: WindowSet, F: FamilyDescriptor) -> Verdict:
    return F.dual_membership(A)


def tilde_membership(A: WindowSet, F: FamilyDescriptor, n_max: int | None = None) -> Verdict:
    """Does ``A`` contain an N-thickened member of ``F`` for every ``N <= n_max``?

    By upward closure, a suitable member exists iff the N-interior of ``A``
    (the largest set whose N-thickening fits in ``A``) belongs to ``F``.
    """
    if n_max is None:
        n_max = max(1, int(math.log2(A.horizon)))
    if n_max < 1:
        raise ParameterError("n_max must be at least 1")
    best = 0
    for n in range(1, n_max + 1):
        v = F.membership(A.interior(n))
        if not v.is_consistent:
            detail = f"largest passing N = {best}; at N = {n}: {v.evidence}"
            if v.is_inconclusive:
                return Verdict.inconclusive(detail, best)
            return Verdict.inconsistent(detail, {"largest_passing": best, "failing_n": n})
        best = n
    return Verdict.consistent(f"N-thickened member found for every N <= {n_max}", n_max)


def default_eps_schedule(m: int = 10) -> list[float]:
    return [2.0**-k for k in range(1, m + 1)]


def check_eps_schedule(eps_schedule: Sequence[float]) -> list[float]:
    eps = list(eps_schedule)
    if not eps:
        raise ParameterError("eps schedule must be nonempty")
    if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ParameterError("eps schedule must be strictly decreasing positives")
    return eps


def hits_below(distances: Sequence[float], eps: float) -> WindowSet:
    """``{n : d_n < eps}`` for a series indexed ``1..H``."""
    return WindowSet(len(distances), tuple(n for n, d in enumerate(distances, start=1) if d < eps))


def f_limit(distances: Sequence[float], F: FamilyDescriptor, eps_schedule: Sequence[float] | None = None) -> Verdict:
    """F-convergence of a series given by its distances ``d_1..d_H`` to the target."""
    eps = check_eps_schedule(eps_schedule or default_eps_schedule())
    if not distances:
        raise ParameterError("series must be nonempty")
    verdicts = []
    for e in eps:
        v = F.membership(hits_below(distances, e))
        verdicts.append(Verdict(v.value, f"eps={e:g}: {v.evidence}", v.witness if v.witness is not None else e))
    return conjoin(verdicts)


def distance_series(points: Sequence, target) -> list[float]:
    return [(p - target).norm() for p in points]


def generated_filter(chain: Sequence[WindowSet]) -> GeneratedFilter:
    if not chain:
        raise ParameterError("chain must be nonempty")
    return GeneratedFilter(tuple(chain))


# ---------------------------------------------------------------------------
# brute-force oracle

MAX_ORACLE_HORIZON = 20


def exhaustive_family_oracle(horizon: int, F: FamilyDescriptor) -> set[frozenset[int]]:
    """Every subset of ``[1, H]`` belonging to the window family, by enumeration.

    Works from the definitions (upward closure of minimal members, or the
    block-cover form of syndeticity), independently of the window scanners.
    """
    table = exhaustive_family_table(horizon, F)
    return {frozenset(i + 1 for i in range(horizon) if mask >> i & 1) for mask in np.flatnonzero(table).tolist()}


def exhaustive_family_table(horizon: int, F: FamilyDescriptor) -> np.ndarray:
    """Indicator over all ``2**H`` masks (bit ``i`` is the integer ``i + 1``)."""
    if horizon < 1 or horizon > MAX_ORACLE_HORIZON:
        raise ParameterError(f"oracle horizon must lie in [1, {MAX_ORACLE_HORIZON}]")
    if isinstance(F, Syndetic):
        return kernels.window_cover_table(horizon, F.gap(horizon) + 1)
    minimal = np.asarray(F.minimal_masks(horizon), dtype=np.uint64)
    return kernels.upward_closure_table(minimal, horizon)


def all_subsets(horizon: int) -> Iterable[WindowSet]:
    for bits in itertools.product((0, 1), repeat=horizon):
        yield WindowSet(horizon, tuple(i + 1 for i, b in enumerate(bits) if b))
