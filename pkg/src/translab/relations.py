"""Proximal-type relations between orbits, cell witnesses and RP pairs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import ParameterError, WitnessNotFound
from .family import (
    Cofinite,
    FamilyDescriptor,
    Verdict,
    WindowSet,
    check_eps_schedule,
    conjoin,
    default_eps_schedule,
    dual_membership,
    f_limit,
    tail_start,
    window_membership,
)
from .operators import Operator
from .orbits import (
    Ball,
    Sampler,
    analytic_hit,
    hitting_sets,
    overall_evidence,
    transitivity_report,
)
from .vectors import SparseVector


@dataclass(frozen=True)
class PairSeries:
    x: SparseVector
    y: SparseVector
    d: tuple[float, ...]

    @property
    def horizon(self) -> int:
        return len(self.d)

    def rows(self):
        return ((n, v) for n, v in enumerate(self.d, start=1))


def pair_series(op: Operator, x: SparseVector, y: SparseVector, horizon: int) -> PairSeries:
    """``d_n = ||T^n x - T^n y|| = ||T^n (x - y)||`` for ``n = 1..H``."""
    if horizon < 1:
        raise ParameterError("horizon must be at least 1")
    diff = x - y
    return PairSeries(x, y, tuple(op.iterate(diff, n).norm() for n in range(1, horizon + 1)))


def _proximal(series: PairSeries, eps: Sequence[float]) -> Verdict:
    # liminf on a window: the minimum over [H/2, H]
    H = series.horizon
    start = tail_start(H, 0.5)
    low = min(series.d[start - 1:])
    for e in eps:
        if not low < e:
            return Verdict.inconsistent(f"eps={e:g}: min over [{start}, {H}] is {low:.3g}", low)
    return Verdict.consistent(f"min over [{start}, {H}] is {low:.3g}", low)


def _s_asymptotic(series: PairSeries, S: WindowSet, eps: Sequence[float], theta: float = 0.5) -> Verdict:
    if not len(S):
        raise ParameterError("S must be nonempty")
    H = series.horizon
    if S.horizon > H:
        raise ParameterError("S reaches beyond the series")
    start = tail_start(H, theta)
    idx = [n for n in S if n >= start]
    if not idx:
        return Verdict.inconclusive(f"S has no index in the tail [{start}, {H}]")
    for e in eps:
        bad = next((n for n in idx if not series.d[n - 1] < e), None)
        if bad is not None:
            return Verdict.inconsistent(f"eps={e:g}: d_{bad} = {series.d[bad - 1]:.3g} with {bad} in S", bad)
    return Verdict.consistent(f"d_n below every eps on {len(idx)} tail indices of S")


MODES = ("proximal", "asymptotic", "s_asymptotic", "f_proximal")


def classify_pair(series: PairSeries, modes: Mapping[str, object] | Sequence[str] = MODES,
                  eps_schedule: Sequence[float] | None = None) -> dict[str, Verdict]:
    """Per-mode verdicts.

    ``modes`` maps a mode name to its parameter: ``s_asymptotic`` takes a
    ``WindowSet`` S, ``f_proximal`` a family.  ``asymptotic`` is the F-limit
    along the cofinite family; ``f_proximal`` applies the same limit along F.
    """
    eps = check_eps_schedule(eps_schedule or default_eps_schedule())
    if not isinstance(modes, Mapping):
        modes = {m: None for m in modes}
    out = {}
    for mode, arg in modes.items():
        if mode == "proximal":
            out[mode] = _proximal(series, eps)
        elif mode == "asymptotic":
            out[mode] = f_limit(series.d, Cofinite(), eps)
        elif mode == "s_asymptotic":
            S = arg if arg is not None else WindowSet.full(series.horizon)
            out[mode] = _s_asymptotic(series, S, eps)
        elif mode == "f_proximal":
            F = arg if arg is not None else Cofinite()
            out[mode] = f_limit(series.d, F, eps)
        else:
            raise ParameterError(f"unknown relation mode {mode!r}")
    return out


# ---------------------------------------------------------------------------
# cells


@dataclass(frozen=True)
class CellWitness:
    ball: Ball
    y: SparseVector
    S: WindowSet
    verdict: Verdict
    route: str
    family: FamilyDescriptor | None = None

    def to_json(self) -> dict:
        data = {
            "ball": self.ball.to_json(),
            "y": self.y.to_json(),
            "S": self.S.to_json(),
            "verdict": self.verdict.to_json(),
            "route": self.route,
        }
        if self.family is not None:
            data["F"] = self.family.to_json()
        return data


def annihilation_index(op: Operator, k: SparseVector, limit: int = 4096) -> int | None:
    """Least ``n`` with ``T^n k = 0`` (exact), searched up to ``limit``."""
    if k.is_zero():
        return 0
    hi = max(1, k.max_index + 1)
    while not op.iterate(k, hi).is_zero():
        if hi >= limit:
            return None
        hi = min(limit, 2 * hi)
    lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if op.iterate(k, mid).is_zero():
            hi = mid
        else:
            lo = mid
    return hi


def _kernel_perturbation(x: SparseVector, ball: Ball) -> SparseVector:
    """Finitely supported ``k`` with ``x + k`` in the ball.

    Vectors here are already finitely supported, so ``center - x`` works;
    it is truncated to the shortest prefix that still lands in the ball.
    """
    k = ball.center - x
    for cut in sorted(set(k.support)):
        cand = k.truncate(cut)
        if ball.contains(x + cand):
            return cand
    return k


def asymptotic_cell_sample(op: Operator, x: SparseVector, target: Ball, S_hint: WindowSet | None = None,
                           horizon: int | None = None,
                           eps_schedule: Sequence[float] | None = None) -> CellWitness:
    """``y`` in ``target`` with ``(x, y)`` S-asymptotic.

    Kernel route (dense generalized kernel): ``y = x + k`` with ``k``
    finitely supported, so ``T^n(y - x) = 0`` eventually and ``S`` is the
    whole window.  Otherwise ``S_hint`` must be given and the candidate
    ``y = center`` is validated along it.
    """
    k = _kernel_perturbation(x, target)
    y = x + k
    if op.dense_generalized_kernel:
        m = annihilation_index(op, k)
        if m is None:
            raise WitnessNotFound("perturbation is not annihilated", {"support": list(k.support)})
        H = horizon or max(32, 4 * m)
        S = WindowSet.full(H)
        route = "kernel"
    elif S_hint is not None:
        H = horizon or S_hint.horizon
        S = S_hint
        route = "hint"
    else:
        raise WitnessNotFound(
            f"{type(op).__name__} has no dense generalized kernel and no decay sequence was given",
            {"distance": (x - target.center).norm()})
    series = pair_series(op, x, y, H)
    verdict = classify_pair(series, {"s_asymptotic": S}, eps_schedule)["s_asymptotic"]
    if not verdict.is_consistent:
        raise WitnessNotFound(f"candidate fails S-asymptotic validation: {verdict.evidence}",
                              {"route": route, "d_tail": series.d[-1]})
    return CellWitness(target, y, S, verdict, route)


@dataclass(frozen=True)
class CellFailure:
    ball: Ball
    reason: str

    def to_json(self) -> dict:
        return {"ball": self.ball.to_json(), "failure": self.reason}


def f_proximal_cell_density(op: Operator, x: SparseVector, balls: Sequence[Ball], F: FamilyDescriptor,
                            eps_schedule: Sequence[float] | None = None, horizon: int = 200
                            ) -> list[CellWitness | CellFailure]:
    """For each ball a point ``y`` with ``(x, y)`` F-proximal, or the reason none was found."""
    out: list[CellWitness | CellFailure] = []
    for ball in balls:
        try:
            cell = asymptotic_cell_sample(op, x, ball, horizon=horizon, eps_schedule=eps_schedule)
            series = pair_series(op, x, cell.y, horizon)
            verdict = classify_pair(series, {"f_proximal": F}, eps_schedule)["f_proximal"]
        except (WitnessNotFound, ParameterError) as exc:
            out.append(CellFailure(ball, str(exc)))
            continue
        if verdict.is_consistent:
            out.append(CellWitness(ball, cell.y, cell.S, verdict, cell.route, F))
        else:
            out.append(CellFailure(ball, f"{verdict.value.value}: {verdict.evidence}"))
    return out


# ---------------------------------------------------------------------------
# regional proximality


@dataclass(frozen=True)
class RPStep:
    m: int
    n: int
    x_m: SparseVector
    y_m: SparseVector
    distance_to_y: float
    orbit_gap: float

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "x_m": self.x_m.to_json(), "y_m": self.y_m.to_json(),
                "distance_to_y": self.distance_to_y, "orbit_gap": self.orbit_gap}


@dataclass(frozen=True)
class RPWitness:
    steps: tuple[RPStep, ...]
    eps: float
    trivial: bool = False

    @property
    def success(self) -> bool:
        return bool(self.steps) and all(s.orbit_gap < self.eps for s in self.steps)

    def to_json(self) -> dict:
        return {"eps": self.eps, "trivial": self.trivial, "success": self.success,
                "steps": [s.to_json() for s in self.steps]}


def rp_witness(op: Operator, x: SparseVector, y: SparseVector, eps: float = 1e-6, horizon: int = 200,
               steps: int = 10, check_precondition: bool = True) -> RPWitness:
    """Sequences ``x_m = x`` and ``y_m -> y`` whose orbits come within ``eps``.

    Step ``m`` looks for ``n`` in ``N(U_m - x, W_m)`` with
    ``U_m = Ball(y, 2^-m)`` and ``W_m = Ball(0, eps/m)``; the analytic
    hitting point ``z_m`` gives ``y_m = x + z_m`` and
    ``||T^n x_m - T^n y_m|| = ||T^n z_m|| < eps/m``.
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if x == y:
        step = RPStep(1, 1, x, y, 0.0, 0.0)
        return RPWitness((step,), eps, trivial=True)
    space = x.space
    if check_precondition:
        e1 = SparseVector.basis(space.first_index, space)
        battery = [(Ball(x, 0.1), Ball(y, 0.1)), (Ball(y, 0.1), Ball(x, 0.1)), (Ball(e1, 0.1), Ball(e1, 0.1))]
        level = overall_evidence(transitivity_report(op, battery, horizon, sampler=Sampler("analytic")))
        if level == "none":
            raise WitnessNotFound("operator shows no transitivity on the precondition battery",
                                  {"evidence_level": level})
    origin = SparseVector.zero(space)
    out = []
    for m in range(1, steps + 1):
        U = Ball(y - x, 2.0**-m)
        W = Ball(origin, eps / m)
        found = None
        for n in range(1, horizon + 1):
            hit = analytic_hit(op, U, W, n)
            if hit.hit:
                found = (n, hit.point)
                break
        if found is None:
            raise WitnessNotFound(f"N(U_{m} - x, W_{m}) empty within H={horizon}",
                                  {"m": m, "completed": [s.to_json() for s in out]})
        n, z = found
        y_m = x + z
        gap = (op.iterate(x, n) - op.iterate(y_m, n)).norm()
        out.append(RPStep(m, n, x, y_m, (y_m - y).norm(), gap))
    return RPWitness(tuple(out), eps)


# ---------------------------------------------------------------------------
# weak mixing through a filter


@dataclass(frozen=True)
class WMFilterReport:
    verdict: Verdict
    asymptotic_density: Verdict
    hitting_membership: Verdict
    rejected_generators: tuple[int, ...] = ()
    notes: tuple[str, ...] = field(default=(
        "only the supplied kF generators are tested; the condition quantifies over all of kF",))

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.to_json(),
            "asymptotic_density": self.asymptotic_density.to_json(),
            "hitting_membership": self.hitting_membership.to_json(),
            "rejected_generators": list(self.rejected_generators),
            "notes": list(self.notes),
        }


def check_wm_filter(op: Operator, F: FamilyDescriptor, dual_generators: Sequence[WindowSet],
                    points: Sequence[SparseVector], balls: Sequence[Ball], zero_radii: Sequence[float],
                    horizon: int = 200, eps_schedule: Sequence[float] | None = None) -> WMFilterReport:
    """Filter test for weak mixing on finite batteries.

    (1) For each supplied S in kF, point x and ball U there is ``y in U``
    with ``(x, y)`` S-asymptotic.  (2) ``N(W, U)`` belongs to F for each ball
    U and each zero neighbourhood ``W = Ball(0, r)``.
    """
    if not dual_generators:
        raise ParameterError("need at least one kF generator")
    rejected = []
    cond1 = []
    for i, S in enumerate(dual_generators):
        if S.horizon > horizon:
            raise ParameterError("kF generator horizon exceeds the experiment horizon")
        if not dual_membership(S, F).is_consistent:
            rejected.append(i)
            continue
        S_full = WindowSet(horizon, S.members)
        for x in points:
            for U in balls:
                try:
                    cell = asymptotic_cell_sample(op, x, U, S_hint=S_full, horizon=horizon,
                                                  eps_schedule=eps_schedule)
                    v = classify_pair(pair_series(op, x, cell.y, horizon), {"s_asymptotic": S_full},
                                      eps_schedule)["s_asymptotic"]
                except WitnessNotFound as exc:
                    v = Verdict.inconsistent(f"S#{i}: {exc}", i)
                cond1.append(v)
    if not cond1:
        cond1.append(Verdict.inconclusive("every supplied generator was rejected as not in kF"))
    cond2 = []
    for U in balls:
        for r in zero_radii:
            W = Ball(SparseVector.zero(U.center.space), r)
            N = hitting_sets(op, W, U, horizon, Sampler("analytic"))
            v = window_membership(N, F)
            cond2.append(Verdict(v.value, f"N(W_{r:g}, U): {v.evidence}", v.witness))
    a, b = conjoin(cond1), conjoin(cond2)
    return WMFilterReport(conjoin([a, b]), a, b, tuple(rejected))
