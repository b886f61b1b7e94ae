"""Witness checkers for the transitivity criteria and closed-form shift tests.

A witness supplies two generators of (assumed dense) sets, maps ``I_n`` and
``S_n`` and an index sequence.  Checkers evaluate the norm series the
criteria ask about and decide "tends to 0" on the finite horizon by the
enter-and-stay rule: the series drops below ``tol`` at some index in the
first half of the window and never exceeds ``2*tol`` afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from ._parallel import pmap
from .errors import ParameterError, UnsupportedOperation
from .family import (
    Cofinite,
    FamilyDescriptor,
    IndexSequence,
    TailFilter,
    Verdict,
    check_eps_schedule,
    conjoin,
    default_eps_schedule,
    f_limit,
    family_from_json,
    tail_start,
)
from .operators import (
    Differentiation,
    Operator,
    WeightSequence,
    effective_weights,
    is_shift,
    right_inverse,
)
from .sampling import make_rng
from .vectors import LP2, SparseVector, Space, poly_space

DENSITY_NOTE = "density of D1/D2 is assumed by the generator, not verified"

# ---------------------------------------------------------------------------
# generators


def _default_grid() -> tuple[Fraction, ...]:
    return tuple(Fraction(k, 4) for k in range(-4, 5) if k)


@dataclass(frozen=True)
class DenseSetGenerator:
    """Source of sample vectors from a set assumed dense.

    ``finitely_supported`` draws vectors on ``1..max_index`` and
    ``polynomials`` draws polynomials of degree ``< max_index``, both with
    coefficients from ``grid``; ``explicit`` cycles through given vectors.
    """

    kind: str = "finitely_supported"
    max_index: int = 8
    grid: tuple[Fraction, ...] = field(default_factory=_default_grid)
    vectors: tuple[SparseVector, ...] = ()
    space: Space = LP2

    def __post_init__(self):
        if self.kind not in ("finitely_supported", "polynomials", "explicit"):
            raise ParameterError(f"unknown generator kind {self.kind!r}")
        if self.kind == "explicit" and not self.vectors:
            raise ParameterError("explicit generator needs vectors")
        if self.kind == "polynomials" and self.space.kind != "poly":
            object.__setattr__(self, "space", poly_space())
        if self.max_index < 1:
            raise ParameterError("max_index must be positive")

    @classmethod
    def finitely_supported(cls, max_index: int = 8) -> "DenseSetGenerator":
        return cls("finitely_supported", max_index)

    @classmethod
    def polynomials(cls, max_degree: int = 8) -> "DenseSetGenerator":
        return cls("polynomials", max_degree + 1, space=poly_space())

    @classmethod
    def explicit(cls, vectors: Sequence[SparseVector]) -> "DenseSetGenerator":
        vectors = tuple(vectors)
        top = max((v.max_index for v in vectors), default=1)
        return cls("explicit", max(1, top), vectors=vectors, space=vectors[0].space if vectors else LP2)

    @property
    def declared_dense(self) -> bool:
        if self.kind != "explicit":
            return True
        # a finite list is never dense; flagged rather than rejected
        return False

    @property
    def support_bound(self) -> int:
        """Largest index a generated vector can use."""
        if self.kind == "explicit":
            return max(v.max_index for v in self.vectors)
        return self.space.first_index + self.max_index - 1

    def sample(self, count: int, seed: int | None) -> list[SparseVector]:
        if count < 1:
            raise ParameterError("sample count must be positive")
        if self.kind == "explicit":
            return [self.vectors[i % len(self.vectors)] for i in range(count)]
        rng = make_rng(seed)
        out = []
        grid = self.grid
        lo = self.space.first_index
        for _ in range(count):
            size = int(rng.integers(1, self.max_index + 1))
            idx = sorted(int(i) + lo for i in rng.choice(self.max_index, size=size, replace=False))
            coeffs = rng.integers(0, len(grid), size=size)
            out.append(SparseVector({i: grid[int(c)] for i, c in zip(idx, coeffs)}, self.space))
        return out

    def to_json(self) -> dict:
        data = {"kind": self.kind, "max_index": self.max_index}
        if self.kind == "explicit":
            data["vectors"] = [v.to_json() for v in self.vectors]
        else:
            data["grid"] = [str(g) for g in self.grid]
        return data

    @classmethod
    def from_json(cls, data) -> "DenseSetGenerator":
        kind = data.get("kind", "finitely_supported")
        if kind == "explicit":
            return cls.explicit([SparseVector.from_json(v) for v in data["vectors"]])
        grid = tuple(Fraction(g) for g in data["grid"]) if "grid" in data else _default_grid()
        if kind == "polynomials":
            return cls("polynomials", int(data.get("max_index", 9)), grid, space=poly_space())
        return cls(kind, int(data.get("max_index", 8)), grid)


# ---------------------------------------------------------------------------
# witnesses

MapRule = Callable[[Operator, int, SparseVector], SparseVector]


def _identity_map(op, n, x):
    return x


def _zero_map(op, n, x):
    return SparseVector.zero(x.space)


def _right_inverse_map(op, n, y):
    return right_inverse(op).iterate(y, n)


MAP_TAGS: dict[str, MapRule] = {
    "identity": _identity_map,
    "zero": _zero_map,
    "right_inverse_power": _right_inverse_map,
}


@dataclass(frozen=True)
class CriterionWitness:
    D1: DenseSetGenerator
    D2: DenseSetGenerator
    I_map: str | MapRule = "identity"
    S_map: str | MapRule = "right_inverse_power"
    index_sequence: IndexSequence = field(default_factory=IndexSequence)
    family: FamilyDescriptor | None = None

    def I(self, op: Operator, n: int, x: SparseVector) -> SparseVector:
        return _resolve(self.I_map)(op, n, x)

    def S(self, op: Operator, n: int, y: SparseVector) -> SparseVector:
        return _resolve(self.S_map)(op, n, y)

    @property
    def is_full(self) -> bool:
        return self.index_sequence.rule == "all" and self.index_sequence.offset == 0

    def to_json(self) -> dict:
        return {
            "D1": self.D1.to_json(),
            "D2": self.D2.to_json(),
            "I_map": self.I_map if isinstance(self.I_map, str) else "custom",
            "S_map": self.S_map if isinstance(self.S_map, str) else "custom",
            "index_sequence": self.index_sequence.to_json(),
            "family": self.family.to_json() if self.family is not None else None,
        }

    @classmethod
    def from_json(cls, data) -> "CriterionWitness":
        fam = data.get("family")
        return cls(
            DenseSetGenerator.from_json(data.get("D1", {})),
            DenseSetGenerator.from_json(data.get("D2", {})),
            data.get("I_map", "identity"),
            data.get("S_map", "right_inverse_power"),
            IndexSequence.from_json(data.get("index_sequence", {"rule": "all"})),
            family_from_json(fam) if fam else None,
        )


def _resolve(rule) -> MapRule:
    if callable(rule):
        return rule
    try:
        return MAP_TAGS[rule]
    except KeyError:
        raise ParameterError(f"unknown map tag {rule!r}") from None


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class SeriesCheck:
    """One norm series judged by the enter-and-stay rule."""

    condition: str
    sample: int
    passed: bool
    entered_at: int | None
    worst_after: float
    last: float

    def to_json(self) -> dict:
        return {"condition": self.condition, "sample": self.sample, "passed": self.passed,
                "entered_at": self.entered_at, "worst_after": self.worst_after, "last": self.last}


@dataclass(frozen=True)
class CriterionReport:
    criterion: str
    passed: bool
    conditions: dict[str, bool]
    worst: dict[str, SeriesCheck | Verdict | None]
    notes: tuple[str, ...] = ()

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "status": self.status,
            "conditions": dict(self.conditions),
            "worst": {k: (v.to_json() if v is not None else None) for k, v in self.worst.items()},
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class FamilyReport:
    """Verdict-valued report for the family-relative criteria."""

    criterion: str
    verdict: Verdict
    conditions: dict[str, Verdict]
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.verdict.is_consistent

    @property
    def status(self) -> str:
        return {"consistent": "pass", "inconsistent": "fail"}.get(self.verdict.value.value, "inconclusive")

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "status": self.status,
            "verdict": self.verdict.to_json(),
            "conditions": {k: v.to_json() for k, v in self.conditions.items()},
            "notes": list(self.notes),
        }


def tends_to_zero(series: Sequence[float], indices: Sequence[int], horizon: int, tol: float
                  ) -> tuple[bool, int | None, float]:
    """Enter-and-stay rule along ``indices`` (values aligned with ``series``)."""
    cutoff = horizon / 2
    for k, (n, v) in enumerate(zip(indices, series)):
        if n > cutoff:
            break
        if v < tol:
            rest = series[k:]
            worst = max(rest)
            return worst <= 2 * tol, n, worst
    return False, None, max(series) if series else math.inf


def _norm(v: SparseVector) -> float:
    return v.norm()


def _sequence(w: CriterionWitness, horizon: int) -> list[int]:
    seq = w.index_sequence.upto(horizon)
    if not seq:
        raise ParameterError(f"index sequence has no terms in [1, {horizon}]")
    return seq


def _check_series(condition, sample, values, seq, horizon, tol) -> SeriesCheck:
    ok, entered, worst = tends_to_zero(values, seq, horizon, tol)
    return SeriesCheck(condition, sample, ok, entered, worst, values[-1])


def _three_conditions(name: str, op: Operator, w: CriterionWitness, horizon: int, tol: float,
                      samples: int, seed: int | None) -> CriterionReport:
    seq = _sequence(w, horizon)
    xs = w.D1.sample(samples, seed)
    ys = w.D2.sample(samples, None if seed is None else seed + 1)

    def cond_i(item):
        i, x = item
        return _check_series("i", i, [_norm(op.iterate(x, n)) for n in seq], seq, horizon, tol)

    def cond_ii_iii(item):
        j, y = item
        pre = [w.S(op, n, y) for n in seq]
        b = [_norm(p) for p in pre]
        c = [_norm(op.iterate(p, n) - y) for p, n in zip(pre, seq)]
        return (_check_series("ii", j, b, seq, horizon, tol), _check_series("iii", j, c, seq, horizon, tol))

    checks_i = pmap(cond_i, list(enumerate(xs)))
    pairs = pmap(cond_ii_iii, list(enumerate(ys)))
    checks_ii = [p[0] for p in pairs]
    checks_iii = [p[1] for p in pairs]
    conditions = {}
    worst = {}
    for label, checks in (("i", checks_i), ("ii", checks_ii), ("iii", checks_iii)):
        failed = [c for c in checks if not c.passed]
        conditions[label] = not failed
        worst[label] = failed[0] if failed else max(checks, key=lambda c: c.worst_after)
    notes = [DENSITY_NOTE]
    if not (w.D1.declared_dense and w.D2.declared_dense):
        notes.append("non-dense generator: a pass is not evidence for the criterion")
    return CriterionReport(name, all(conditions.values()), conditions, worst, tuple(notes))


def verify_hc(op: Operator, w: CriterionWitness, horizon: int = 2000, tol: float = 1e-9,
              samples: int = 50, seed: int | None = 0) -> CriterionReport:
    """Hypercyclicity Criterion along ``w.index_sequence``.

    (i) ``T^{n_k} x -> 0`` on D1, (ii) ``S_{n_k} y -> 0`` and
    (iii) ``T^{n_k} S_{n_k} y -> y`` on D2.
    """
    return _three_conditions("hc", op, w, horizon, tol, samples, seed)


def verify_kitai(op: Operator, w: CriterionWitness, horizon: int = 200, tol: float = 1e-9,
                 samples: int = 50, seed: int | None = 0) -> CriterionReport:
    """Kitai's Criterion: the same three conditions along every ``n``."""
    if not w.is_full:
        raise ParameterError("Kitai's Criterion uses the full sequence")
    return _three_conditions("kitai", op, w, horizon, tol, samples, seed)


# -- family-relative criteria ----------------------------------------------


def _pair_series_i(op, w, x, horizon):
    out = []
    for n in range(1, horizon + 1):
        u = w.I(op, n, x)
        out.append(max(_norm(u - x), _norm(op.iterate(u, n))))
    return out


def _pair_series_ii(op, w, y, horizon):
    out = []
    for n in range(1, horizon + 1):
        s = w.S(op, n, y)
        out.append(max(_norm(s), _norm(op.iterate(s, n) - y)))
    return out


def _single_series_i(op, w, x, horizon):
    return [_norm(op.iterate(x, n)) for n in range(1, horizon + 1)]


def _family_run(name, op, w, family, horizon, eps_schedule, samples, seed, series_i, judge):
    eps = check_eps_schedule(eps_schedule or default_eps_schedule())
    xs = w.D1.sample(samples, seed)
    ys = w.D2.sample(samples, None if seed is None else seed + 1)

    def tag(label, idx, v):
        return Verdict(v.value, f"{label}[{idx}] {v.evidence}", v.witness if v.witness is not None else idx)

    vi = pmap(lambda t: tag("D1", t[0], judge(series_i(op, w, t[1], horizon), family, eps)), list(enumerate(xs)))
    vii = pmap(lambda t: tag("D2", t[0], judge(_pair_series_ii(op, w, t[1], horizon), family, eps)),
               list(enumerate(ys)))
    conditions = {"i": conjoin(vi), "ii": conjoin(vii)}
    notes = [DENSITY_NOTE, "pair distance is the max of the two component distances"]
    if not (w.D1.declared_dense and w.D2.declared_dense):
        notes.append("non-dense generator: a pass is not evidence for the criterion")
    return FamilyReport(name, conjoin(conditions.values()), conditions, tuple(notes))


def _witness_family(w: CriterionWitness, family: FamilyDescriptor | None) -> FamilyDescriptor:
    family = family or w.family
    if family is None:
        raise ParameterError("a family is required")
    return family


def verify_ftc(op: Operator, w: CriterionWitness, horizon: int = 200,
               eps_schedule: Sequence[float] | None = None, samples: int = 50, seed: int | None = 0,
               family: FamilyDescriptor | None = None) -> FamilyReport:
    """F-Transitivity Criterion: both pair series F-converge.

    (i) ``(I_n x, T^n I_n x) -> (x, 0)`` on D1 and (ii)
    ``(S_n y, T^n S_n y) -> (0, y)`` on D2, with the max of the two
    component distances as the pair distance.
    """
    return _family_run("ftc", op, w, _witness_family(w, family), horizon, eps_schedule, samples, seed,
                       _pair_series_i, f_limit)


def verify_fkitai(op: Operator, w: CriterionWitness, horizon: int = 200,
                  eps_schedule: Sequence[float] | None = None, samples: int = 50, seed: int | None = 0,
                  family: FamilyDescriptor | None = None) -> FamilyReport:
    """F-Kitai: ``T^n x`` F-converges to 0 on D1; condition (ii) as in FTC."""
    return _family_run("fkitai", op, w, _witness_family(w, family), horizon, eps_schedule, samples, seed,
                       _single_series_i, f_limit)


def _ordinary_limit(series: Sequence[float], family, eps: Sequence[float], theta: float = 0.5) -> Verdict:
    # lim d_n = 0 at desk scale: the tail maximum drops below every eps
    H = len(series)
    start = tail_start(H, theta)
    tail_max = max(series[start - 1:])
    for e in eps:
        if not tail_max < e:
            at = next(n for n in range(start, H + 1) if not series[n - 1] < e)
            return Verdict.inconsistent(f"eps={e:g}: d_{at} = {series[at - 1]:.3g} in tail [{start}, {H}]", at)
    return Verdict.consistent(f"tail max {tail_max:.3g} below every eps")


def verify_mixing_characterization(op: Operator, w: CriterionWitness, horizon: int = 200,
                                   eps_schedule: Sequence[float] | None = None, samples: int = 50,
                                   seed: int | None = 0, theta: float = 0.5) -> FamilyReport:
    """Ordinary-limit form of FTC: both pair series tend to their targets."""
    return _family_run("mixing", op, w, None, horizon, eps_schedule, samples, seed, _pair_series_i,
                       lambda s, _f, eps: _ordinary_limit(s, None, eps, theta))


# ---------------------------------------------------------------------------
# weighted backward shifts in closed form


@dataclass(frozen=True)
class ShiftClassification:
    hypercyclic_evidence: bool
    mixing_evidence: bool
    weakly_mixing_evidence: bool
    max_log2_product: float
    min_log2_tail: float
    threshold_log2: float
    checkpoints: tuple[float, ...]
    horizon: int

    def to_json(self) -> dict:
        return {
            "hypercyclic": self.hypercyclic_evidence,
            "mixing": self.mixing_evidence,
            "weakly_mixing": self.weakly_mixing_evidence,
            "max_log2_product": self.max_log2_product,
            "min_log2_tail_product": self.min_log2_tail,
            "threshold_log2": self.threshold_log2,
            "running_max_checkpoints": list(self.checkpoints),
            "horizon": self.horizon,
        }


def _log2_abs(q) -> float:
    q = abs(q)
    if isinstance(q, Fraction):
        if q == 0:
            return -math.inf
        return math.log2(q.numerator) - math.log2(q.denominator)
    return math.log2(q) if q else -math.inf


def log2_products(w: WeightSequence, horizon: int) -> list[float]:
    """``log2 |w_1 ... w_n|`` for ``n = 1..H`` from the exact products."""
    if w.rule == "constant":
        step = _log2_abs(w.factor)
        return [n * step for n in range(1, horizon + 1)]
    return [_log2_abs(w.prefix(n)) for n in range(1, horizon + 1)]


def classify_shift(w: WeightSequence, horizon: int = 10_000) -> ShiftClassification:
    """Growth of ``P_n = w_1 ... w_n`` as hypercyclicity/mixing evidence.

    Hypercyclic evidence: ``max P_n > H`` and the running maximum still
    increases at each quarter of the window.  Mixing evidence: in addition
    ``P_n > sqrt(H)`` throughout the second half.
    """
    if horizon < 100:
        raise ParameterError("classify_shift needs H >= 100")
    logs = log2_products(w, horizon)
    threshold = math.log2(horizon)
    checkpoints = tuple(max(logs[: q * horizon // 4]) for q in range(1, 5))
    increasing = all(b > a for a, b in zip(checkpoints, checkpoints[1:]))
    top = checkpoints[-1]
    hyper = top > threshold and increasing
    tail_min = min(logs[horizon // 2:])
    mixing = hyper and tail_min > threshold / 2
    return ShiftClassification(hyper, mixing, hyper, top, tail_min, threshold, checkpoints, horizon)


def record_sequence(w: WeightSequence, horizon: int, J: int = 1) -> list[int]:
    """Indices where ``Q_J(n) = min_{j<=J} |w_j ... w_{j+n-1}|`` sets a record.

    For ``J = 1`` this is where the partial products ``P_n`` reach a new
    maximum.  ``S_{1/w}^n e_j`` has norm ``1/|w_j ... w_{j+n-1}|``, so along
    these records every vector supported in ``1..J`` is pushed to 0.
    """
    if J < 1:
        raise ParameterError("J must be positive")
    best = None
    out = []
    for n in range(1, horizon + 1):
        q = min(abs(w.window_product(j, n)) for j in range(1, J + 1))
        if best is None or q > best:
            best = q
            out.append(n)
    return out


def build_shift_witness(op: Operator, flavor: str = "kitai", J: int | None = None, horizon: int = 2000,
                        generator: DenseSetGenerator | None = None,
                        family: FamilyDescriptor | None = None) -> CriterionWitness:
    """Canonical witness: D1 = D2 = finitely supported (or polynomials),
    ``I_n`` the identity and ``S_n`` the n-th power of the right inverse.

    ``hc`` derives the index sequence from :func:`record_sequence` with
    ``J`` defaulting to the generator's largest index; ``ftc`` uses the tail
    filter along that sequence unless a family is given.
    """
    if flavor not in ("kitai", "hc", "ftc"):
        raise ParameterError(f"unknown witness flavor {flavor!r}")
    if isinstance(op, Differentiation):
        gen = generator or DenseSetGenerator.polynomials()
        seq = IndexSequence("all")
    elif is_shift(op):
        gen = generator or DenseSetGenerator.finitely_supported()
        seq = IndexSequence("all")
        if flavor in ("hc", "ftc"):
            J = J if J is not None else gen.support_bound
            seq = IndexSequence("explicit", tuple(record_sequence(effective_weights(op), horizon, J)))
    else:
        raise UnsupportedOperation(f"no canonical witness for {type(op).__name__}")
    if flavor == "ftc" and family is None:
        family = TailFilter(seq) if seq.rule == "explicit" else Cofinite()
    return CriterionWitness(gen, gen, "identity", "right_inverse_power", seq, family)


# ---------------------------------------------------------------------------
# mixing vs Kitai


@dataclass(frozen=True)
class GapReport:
    mixing_evidence: bool
    kitai_witness_pass: bool
    asymptotic_cell_density_evidence: bool
    consistent: bool
    explanation: str

    def to_json(self) -> dict:
        return {
            "mixing_evidence": self.mixing_evidence,
            "kitai_witness_pass": self.kitai_witness_pass,
            "asymptotic_cell_density_evidence": self.asymptotic_cell_density_evidence,
            "consistent_with_characterization": self.consistent,
            "explanation": self.explanation,
        }


def gap_report(op: Operator, horizon: int = 200, seed: int = 0, samples: int = 50,
               scan_horizon: int = 10_000) -> GapReport:
    """Juxtapose mixing evidence, a Kitai witness run and cell density.

    Kitai holds iff the system is mixing and every asymptotic cell
    ``A_N(x)`` is dense; a dense generalized kernel makes the cells dense,
    so for such operators Kitai should track mixing exactly.
    """
    if is_shift(op):
        mixing = classify_shift(effective_weights(op), scan_horizon).mixing_evidence
    else:
        from .orbits import overall_evidence, random_ball_pairs, transitivity_report
        from .vectors import poly_space as _ps

        space = _ps() if op.space_kind == "poly" else LP2
        reports = transitivity_report(op, random_ball_pairs(seed, 10, space=space), horizon)
        mixing = overall_evidence(reports) == "mixing"
    try:
        witness = build_shift_witness(op, "kitai")
        kitai = verify_kitai(op, witness, horizon, 1e-9, samples, seed).passed
    except UnsupportedOperation:
        kitai = False
    cells = bool(op.dense_generalized_kernel)
    consistent = kitai == (mixing and cells)
    if cells:
        why = "dense generalized kernel: asymptotic cells are dense, so Kitai tracks mixing"
    else:
        why = "no dense generalized kernel: cell density is not established"
    if kitai != (mixing and cells):
        why += "; mismatch between the Kitai run and mixing+cells (horizon or witness too weak)"
    return GapReport(mixing, kitai, cells, consistent, why)
