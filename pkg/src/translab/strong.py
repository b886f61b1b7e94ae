"""Strong (product) transitivity checks and the integration decay bound.

Both characterizations ask for (i) a dense set of points killed by some
power of T and (ii) preimage chains ``y_k`` of ``y`` under ``T^{n_k}``
tending to 0.  Here (i) is probed ball by ball with exact annihilation
certificates and (ii) point by point along the canonical chain
``y_k = R^k y`` of the right inverse ``R``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .criteria import DenseSetGenerator
from .errors import ParameterError, UnsupportedOperation
from .operators import (
    NotSurjectiveEvidence,
    Operator,
    is_shift,
    preimage,
    right_inverse,
    surjectivity_probe,
)
from .orbits import Ball, Sampler, overall_evidence, random_ball_pairs, transitivity_report, LEVELS
from .relations import annihilation_index
from .sampling import make_rng, random_vector
from .vectors import SparseVector, poly_space

UNIVERSAL_NOTE = ("the definition quantifies over every open set; these verdicts cover only the "
                  "probe battery")


@dataclass(frozen=True)
class STWitness:
    """Kernel generator plus the canonical backward chain.

    Only ``chain = "canonical"`` (``n_k = k``, ``y_k = R^k y``) is accepted
    by the product check, which needs one sequence shared by all components.
    """

    kernel_generator: DenseSetGenerator
    chain: str = "canonical"

    @classmethod
    def canonical(cls, op: Operator) -> "STWitness":
        if op.space_kind == "poly":
            return cls(DenseSetGenerator.polynomials())
        return cls(DenseSetGenerator.finitely_supported())

    def to_json(self) -> dict:
        return {"kernel_generator": self.kernel_generator.to_json(), "chain": self.chain}


@dataclass(frozen=True)
class AnnihilationCertificate:
    ball: Ball
    x: SparseVector
    n: int

    def to_json(self) -> dict:
        return {"ball": self.ball.to_json(), "x": self.x.to_json(), "n": self.n}


@dataclass(frozen=True)
class ChainTrace:
    y: SparseVector
    norms: tuple[float, ...]
    reached: int | None
    exact: bool

    @property
    def passed(self) -> bool:
        return self.reached is not None and self.exact

    def to_json(self) -> dict:
        return {"y": self.y.to_json(), "norms": list(self.norms), "reached_at": self.reached, "exact": self.exact}


@dataclass(frozen=True)
class STReport:
    kind: str
    passed: bool
    condition_i: bool
    condition_ii: bool
    surjectivity: NotSurjectiveEvidence | None
    certificates: tuple[AnnihilationCertificate, ...] = ()
    traces: tuple = ()
    notes: tuple[str, ...] = (UNIVERSAL_NOTE,)

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        surj = None
        if self.surjectivity is not None:
            s = self.surjectivity
            surj = {"tail_mass": s.tail_mass, "bound": s.bound, "depth": s.depth,
                    "heavy_indices": [j for j, _ in s.heavy][:20]}
        return {
            "header": self.notes[0],
            "kind": self.kind,
            "status": self.status,
            "condition_i": self.condition_i,
            "condition_ii": self.condition_ii,
            "not_surjective_evidence": surj,
            "certificates": [c.to_json() for c in self.certificates],
            "traces": [t.to_json() if hasattr(t, "to_json") else [u.to_json() for u in t] for t in self.traces],
            "notes": list(self.notes[1:]),
        }


def default_probes(op: Operator, seed: int, count: int = 20, max_index: int = 6):
    """Seeded probe balls and points in the operator's space."""
    space = poly_space() if op.space_kind == "poly" else None
    pairs = random_ball_pairs(seed, count, max_index, space=space)
    balls = [p[0] for p in pairs]
    points = [p[1].center for p in pairs]
    return balls, points


def _surjectivity_failure(op: Operator, points: Sequence[SparseVector]) -> NotSurjectiveEvidence | None:
    if not is_shift(op):
        return None
    for y in [surjectivity_probe(op), *points]:
        res = preimage(op, y)
        if isinstance(res, NotSurjectiveEvidence):
            return res
    return None


def _certificate(op: Operator, ball: Ball, gen: DenseSetGenerator) -> AnnihilationCertificate | None:
    x = ball.center
    bound = gen.support_bound
    # kernel points of the generator: the center truncated to its support bound
    if x.max_index > bound:
        x = x.truncate(bound)
    if not ball.contains(x):
        return None
    n = annihilation_index(op, x)
    if n is None or not op.iterate(x, n).is_zero():
        return None
    return AnnihilationCertificate(ball, x, n)


def _chain(op: Operator, y: SparseVector, tol: float, K: int) -> ChainTrace:
    R = right_inverse(op)
    norms = []
    reached = None
    exact = True
    for k in range(1, K + 1):
        yk = R.iterate(y, k)
        norms.append(yk.norm())
        back = op.iterate(yk, k)
        if yk.is_exact() and y.is_exact():
            exact = exact and back == y
        else:
            exact = exact and (back - y).norm() < 1e-12
        if reached is None and norms[-1] < tol:
            reached = k
            break
    return ChainTrace(y, tuple(norms), reached, exact)


def check_st(op: Operator, w: STWitness | None = None, probe_balls: Sequence[Ball] | None = None,
             probe_points: Sequence[SparseVector] | None = None, tol: float = 1e-9, K: int = 64,
             seed: int = 0) -> STReport:
    """Strong transitivity on a probe battery."""
    w = w or STWitness.canonical(op)
    if probe_balls is None or probe_points is None:
        balls, points = default_probes(op, seed)
        probe_balls = balls if probe_balls is None else probe_balls
        probe_points = points if probe_points is None else probe_points
    try:
        right_inverse(op)
    except UnsupportedOperation:
        raise UnsupportedOperation(f"{type(op).__name__} has no canonical preimage chain") from None
    surj = _surjectivity_failure(op, probe_points)
    if surj is not None:
        return STReport("st", False, False, False, surj,
                        notes=(UNIVERSAL_NOTE, "canonical preimage diverges: not surjective, so not ST"))
    certs = [_certificate(op, b, w.kernel_generator) for b in probe_balls]
    traces = [_chain(op, y, tol, K) for y in probe_points]
    ok_i = all(c is not None for c in certs)
    ok_ii = all(t.passed for t in traces)
    return STReport("st", ok_i and ok_ii, ok_i, ok_ii, None,
                    tuple(c for c in certs if c is not None), tuple(traces))


def check_spt(op: Operator, w: STWitness | None = None, n_tuple: int = 2,
              probe_tuples: Sequence[Sequence[SparseVector]] | None = None, tol: float = 1e-9, K: int = 64,
              seed: int = 0, probe_balls: Sequence[Ball] | None = None) -> STReport:
    """Strong product transitivity: one shared ``n_k = k`` for all components."""
    if n_tuple < 1:
        raise ParameterError("tuple size must be at least 1")
    w = w or STWitness.canonical(op)
    if w.chain != "canonical":
        raise ParameterError("the product check needs the shared canonical chain")
    if probe_tuples is None:
        rng = make_rng(seed)
        space = poly_space() if op.space_kind == "poly" else None
        kw = {"space": space} if space else {}
        probe_tuples = [[random_vector(rng, 6, **kw) for _ in range(n_tuple)] for _ in range(20)]
    if any(len(t) != n_tuple for t in probe_tuples):
        raise ParameterError(f"every probe tuple must have {n_tuple} components")
    if probe_balls is None:
        probe_balls, _ = default_probes(op, seed)
    flat = [y for t in probe_tuples for y in t]
    surj = _surjectivity_failure(op, flat)
    if surj is not None:
        return STReport("spt", False, False, False, surj,
                        notes=(UNIVERSAL_NOTE, "a component has a divergent canonical preimage"))
    certs = [_certificate(op, b, w.kernel_generator) for b in probe_balls]
    ok_i = all(c is not None for c in certs)
    traces = []
    ok_ii = True
    for tup in probe_tuples:
        comps = [_chain(op, y, 0.0, K) for y in tup]  # full K-step traces
        shared = None
        for k in range(K):
            if all(c.norms[k] < tol for c in comps):
                shared = k + 1
                break
        exact = all(c.exact for c in comps)
        comps = [ChainTrace(c.y, c.norms[: shared or K], shared, c.exact) for c in comps]
        traces.append(tuple(comps))
        ok_ii = ok_ii and shared is not None and exact
    return STReport("spt", ok_i and ok_ii, ok_i, ok_ii, None,
                    tuple(c for c in certs if c is not None), tuple(traces))


# ---------------------------------------------------------------------------
# integration bound


@dataclass(frozen=True)
class BoundRow:
    n: int
    lhs: float
    bound: float
    ratio: float
    holds: bool


@dataclass(frozen=True)
class IntegrationBoundReport:
    M: float
    r: float
    rows: tuple[BoundRow, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(row.holds for row in self.rows)

    def to_json(self) -> dict:
        return {"M": self.M, "r": self.r, "tol": self.tol, "passed": self.passed,
                "rows": [{"n": r.n, "lhs": r.lhs, "bound": r.bound, "ratio": r.ratio, "holds": r.holds}
                         for r in self.rows]}


def integration_bound_check(f: SparseVector, r: float, n_max: int, grid_points: int = 360,
                            tol: float = 1e-12) -> IntegrationBoundReport:
    """``max_{|z|=r} |S^n f(z)| <= M r^n / n!`` with ``M = max_{|z|=r} |f|``.

    Both maxima use the same ``grid_points`` equally spaced angles; ``ratio``
    is ``lhs / bound`` (1 means the bound is attained).
    """
    if r <= 0:
        raise ParameterError("r must be positive")
    if grid_points < 8:
        raise ParameterError("grid_points must be at least 8")
    if f.space.kind != "poly":
        raise ParameterError("f must be a polynomial vector")
    from .operators import Integration

    S = Integration()
    M = float(f.circle_values(grid_points, r).max())
    rows = []
    for n in range(1, n_max + 1):
        lhs = float(S.iterate(f, n).circle_values(grid_points, r).max())
        bound = M * r**n / math.factorial(n)
        ratio = lhs / bound if bound > 0 else (0.0 if lhs == 0 else math.inf)
        rows.append(BoundRow(n, lhs, bound, ratio, lhs <= bound + tol))
    return IntegrationBoundReport(M, r, tuple(rows), tol)


# ---------------------------------------------------------------------------
# ST => weak mixing cross-check


@dataclass(frozen=True)
class CrossCheck:
    status: str  # consistent | red_flag | vacuous
    evidence_level: str
    detail: str

    def to_json(self) -> dict:
        return {"status": self.status, "evidence_level": self.evidence_level, "detail": self.detail}


def st_implies_wm_crosscheck(op: Operator, st_report: STReport, horizon: int = 200, seed: int = 0,
                             pairs: int = 10) -> CrossCheck:
    """A strongly transitive operator must show weak-mixing evidence."""
    if not st_report.passed:
        return CrossCheck("vacuous", "n/a", "strong transitivity check did not pass")
    space = poly_space() if op.space_kind == "poly" else None
    battery = random_ball_pairs(seed, pairs, space=space)
    level = overall_evidence(transitivity_report(op, battery, horizon, sampler=Sampler("analytic")))
    if LEVELS.index(level) >= LEVELS.index("weakly_mixing"):
        return CrossCheck("consistent", level, "thick hitting windows on every probe pair")
    return CrossCheck("red_flag", level, "ST passed but some hitting window is not thick (checker bug or small H)")
