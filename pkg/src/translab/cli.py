"""Command line runner: ``translab run | gallery | classify-shift``.

Exit codes: 0 pass/consistent, 1 fail/inconsistent, 2 inconclusive,
3 configuration error.  JSON reports are written with sorted keys and no
timing data, so equal (config, seed) pairs give byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .criteria import (
    CriterionWitness,
    build_shift_witness,
    classify_shift,
    gap_report,
    verify_fkitai,
    verify_ftc,
    verify_hc,
    verify_kitai,
    verify_mixing_characterization,
)
from .errors import (
    ConfigError,
    DichotomyInconclusive,
    ParameterError,
    TranslabError,
    UnsupportedOperation,
    WitnessNotFound,
)
from .family import (
    Verdict,
    WindowSet,
    all_subsets,
    classify_window,
    exhaustive_family_oracle,
    family_from_json,
    window_membership,
)
from .operators import (
    BackwardShift,
    Differentiation,
    Operator,
    WeightSequence,
    effective_weights,
    example21_position,
    operator_from_json,
    rolewicz,
)
from .orbits import (
    Ball,
    Sampler,
    dichotomy,
    evidence_level,
    hitting_sets,
    orbit,
    random_ball_pairs,
    write_series_csv,
)
from .relations import (
    CellWitness,
    asymptotic_cell_sample,
    check_wm_filter,
    classify_pair,
    f_proximal_cell_density,
    pair_series,
    rp_witness,
)
from .sampling import make_rng, random_vector
from .strong import check_spt, check_st, integration_bound_check, st_implies_wm_crosscheck
from .vectors import SparseVector, poly_space

SCHEMA_VERSION = 1
EXIT = {"pass": 0, "fail": 1, "inconclusive": 2}
CONFIG_ERROR = 3

VERDICT_STATUS = {"consistent": "pass", "inconsistent": "fail", "inconclusive": "inconclusive"}


def _status_of(verdict: Verdict) -> str:
    return VERDICT_STATUS[verdict.value.value]


def _to_jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    # non-finite floats are not valid JSON; spell them out
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(report: dict) -> str:
    data = json.loads(json.dumps(report, default=_to_jsonable))
    return json.dumps(_clean(data), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# config


class Config:
    """Validated view of a schema-versioned experiment config."""

    SAMPLING = {"criterion", "strong", "gap-report", "wm-filter"}

    def __init__(self, raw: dict, seed_override: int | None = None):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        version = raw.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
        self.raw = raw
        self.experiment = raw.get("experiment")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        self.horizon = raw.get("horizon", 200)
        if not isinstance(self.horizon, int) or isinstance(self.horizon, bool) or self.horizon < 1:
            raise ConfigError("horizon must be a positive integer")
        self.seed = seed_override if seed_override is not None else raw.get("seed")
        if self.seed is not None and (not isinstance(self.seed, int) or isinstance(self.seed, bool)):
            raise ConfigError("seed must be an integer")
        self.params = raw.get("params", {})
        if not isinstance(self.params, dict):
            raise ConfigError("params must be an object")
        self.tolerance = float(raw.get("tolerance", 1e-9))
        eps = raw.get("eps_schedule")
        self.eps_schedule = [float(e) for e in eps] if eps is not None else None
        out = raw.get("output", {})
        self.json_path = out.get("json")
        self.csv_path = out.get("csv")
        op = raw.get("operator")
        self.operator = None
        if op is not None:
            try:
                self.operator = operator_from_json(op)
            except (ParameterError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad operator: {exc}") from None
        if self.experiment in self.SAMPLING or self._samples_randomly():
            if self.seed is None:
                raise ConfigError(f"experiment {self.experiment!r} samples randomly: a seed is required")

    def _samples_randomly(self) -> bool:
        sampler = self.params.get("sampler")
        if isinstance(sampler, dict) and sampler.get("mode") == "random":
            return True
        if self.experiment == "relation":
            return any(k in self.params for k in ("random_pairs", "random_balls"))
        return False

    def need_operator(self) -> Operator:
        if self.operator is None:
            raise ConfigError(f"experiment {self.experiment!r} needs an operator")
        return self.operator

    def space(self):
        op = self.operator
        return poly_space() if op is not None and op.space_kind == "poly" else None

    def vector(self, key: str, default: SparseVector | None = None) -> SparseVector:
        data = self.params.get(key)
        if data is None:
            if default is None:
                raise ConfigError(f"params.{key} is required")
            return default
        return self.vector_from(data, f"params.{key}")

    def vector_from(self, data: Any, label: str) -> SparseVector:
        """Vector JSON; without an explicit space it lives in the operator's space."""
        try:
            if "space" not in data:
                data = dict(data, space=self.first_basis().space.to_json())
            return SparseVector.from_json(data)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad vector {label}: {exc}") from None

    def ball(self, data: Any, label: str) -> Ball:
        try:
            return Ball(self.vector_from(data["center"], label), float(data["radius"]))
        except (KeyError, TypeError, ValueError, ParameterError) as exc:
            raise ConfigError(f"bad ball {label}: {exc}") from None

    def family(self, key: str = "family", required: bool = True):
        data = self.params.get(key)
        if data is None:
            if required:
                raise ConfigError(f"params.{key} is required")
            return None
        try:
            return family_from_json(data)
        except (ParameterError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad family: {exc}") from None

    def first_basis(self) -> SparseVector:
        space = self.space()
        return SparseVector.basis(space.first_index, space) if space else SparseVector.basis(1)


# ---------------------------------------------------------------------------
# experiments: each returns (status, result dict, csv rows or None, csv columns)

Result = tuple[str, dict, list | None, tuple[str, ...]]


def exp_orbit(cfg: Config) -> Result:
    op = cfg.need_operator()
    x = cfg.vector("x", cfg.first_basis())
    orb = orbit(op, x, cfg.horizon)
    result = {"norms": orb.norms(), "overflow": orb.overflow}
    if "target" in cfg.params:
        V = cfg.ball(cfg.params["target"], "target")
        hits = WindowSet(cfg.horizon, tuple(p.n for p in orb.points if p.n >= 1 and V.contains(p.vector)))
        result["hitting_members"] = list(hits.members)
        result["verdicts"] = classify_window(hits).to_json()
    rows = [(p.n, p.norm) for p in orb.points]
    return "pass", result, rows, ("n", "value")


def exp_hitting(cfg: Config) -> Result:
    op = cfg.need_operator()
    U = cfg.ball(cfg.params.get("U"), "U")
    V = cfg.ball(cfg.params.get("V"), "V")
    sdata = cfg.params.get("sampler", "analytic")
    try:
        sampler = Sampler.from_json(sdata)
        if sampler.mode == "random" and sampler.seed is None:
            sampler = Sampler("random", sampler.count, cfg.seed, sampler.dim)
    except ParameterError as exc:
        raise ConfigError(f"bad sampler: {exc}") from None
    hits = hitting_sets(op, U, V, cfg.horizon, sampler)
    verdicts = classify_window(hits)
    result = {"hitting_members": list(hits.members), "flags": list(hits.flags), "verdicts": verdicts.to_json(),
              "evidence_level": evidence_level(hits, verdicts)}
    family = cfg.family(required=False)
    if family is not None:
        v = window_membership(hits, family)
        result["family_verdict"] = v.to_json()
        status = _status_of(v)
    else:
        status = "pass" if len(hits) else "fail"
    members = set(hits.members)
    rows = [(n, int(n in members)) for n in range(1, cfg.horizon + 1)]
    return status, result, rows, ("n", "value")


def _weights_for(cfg: Config) -> WeightSequence:
    if "weights" in cfg.params:
        try:
            return WeightSequence.from_json(cfg.params["weights"])
        except (ParameterError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad weights: {exc}") from None
    try:
        return effective_weights(cfg.need_operator())
    except UnsupportedOperation as exc:
        raise ConfigError(str(exc)) from None


def exp_classify_shift(cfg: Config) -> Result:
    w = _weights_for(cfg)
    try:
        res = classify_shift(w, cfg.horizon)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    result = res.to_json()
    expect = cfg.params.get("expect")
    status = "pass"
    if expect:
        got = {"hypercyclic": res.hypercyclic_evidence, "mixing": res.mixing_evidence}
        status = "pass" if all(got.get(k) == v for k, v in expect.items()) else "fail"
        result["expect"] = expect
    return status, result, None, ()


CRITERIA = {
    "hc": verify_hc,
    "kitai": verify_kitai,
    "ftc": verify_ftc,
    "fkitai": verify_fkitai,
    "mixing": verify_mixing_characterization,
}


def _witness(cfg: Config, op: Operator, kind: str) -> CriterionWitness:
    data = cfg.params.get("witness", {})
    try:
        if "D1" in data or "D2" in data:
            return CriterionWitness.from_json(data)
        flavor = data.get("flavor", {"hc": "hc", "ftc": "ftc"}.get(kind, "kitai"))
        return build_shift_witness(op, flavor, J=data.get("J"), horizon=cfg.horizon)
    except (ParameterError, UnsupportedOperation, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad witness: {exc}") from None


def exp_criterion(cfg: Config) -> Result:
    op = cfg.need_operator()
    kind = cfg.params.get("kind")
    if kind not in CRITERIA:
        raise ConfigError(f"params.kind must be one of {sorted(CRITERIA)}")
    w = _witness(cfg, op, kind)
    samples = int(cfg.params.get("samples", 50))
    fn = CRITERIA[kind]
    if kind in ("hc", "kitai"):
        rep = fn(op, w, cfg.horizon, cfg.tolerance, samples, cfg.seed)
    elif kind == "mixing":
        rep = fn(op, w, cfg.horizon, cfg.eps_schedule, samples, cfg.seed)
    else:
        rep = fn(op, w, cfg.horizon, cfg.eps_schedule, samples, cfg.seed, family=cfg.family(required=False))
    result = rep.to_json()
    result["witness"] = w.to_json()
    return rep.status, result, None, ()


def exp_relation(cfg: Config) -> Result:
    op = cfg.need_operator()
    mode = cfg.params.get("mode", "pair")
    H = cfg.horizon
    if mode == "pair":
        x = cfg.vector("x")
        y = cfg.vector("y")
        series = pair_series(op, x, y, H)
        modes: dict = {}
        for m in cfg.params.get("modes", ["proximal", "asymptotic"]):
            if m == "s_asymptotic":
                S = cfg.params.get("S")
                modes[m] = WindowSet.from_json(S) if S else None
            elif m == "f_proximal":
                modes[m] = cfg.family(required=False)
            else:
                modes[m] = None
        try:
            verdicts = classify_pair(series, modes, cfg.eps_schedule)
        except ParameterError as exc:
            raise ConfigError(str(exc)) from None
        worst = _worst([v for v in verdicts.values()])
        return (_status_of(worst), {k: v.to_json() for k, v in verdicts.items()}, list(series.rows()),
                ("n", "value"))
    if mode == "asymptotic-cell":
        x = cfg.vector("x", SparseVector.zero(cfg.first_basis().space))
        ball = cfg.ball(cfg.params.get("ball"), "ball")
        try:
            cell = asymptotic_cell_sample(op, x, ball)
        except WitnessNotFound as exc:
            return "fail", {"failure": str(exc), "diagnostics": exc.diagnostics}, None, ()
        return "pass", cell.to_json(), None, ()
    if mode == "f-proximal-cell":
        x = cfg.vector("x", SparseVector.zero(cfg.first_basis().space))
        F = cfg.family()
        if "balls" in cfg.params:
            balls = [cfg.ball(b, f"balls[{i}]") for i, b in enumerate(cfg.params["balls"])]
        else:
            balls = [p[1] for p in random_ball_pairs(cfg.seed, int(cfg.params.get("random_balls", 20)),
                                                     space=cfg.space())]
        cells = f_proximal_cell_density(op, x, balls, F, cfg.eps_schedule, H)
        found = sum(isinstance(c, CellWitness) for c in cells)
        return ("pass" if found == len(cells) else "fail", {"witnesses": cells, "found": found,
                                                            "requested": len(cells)}, None, ())
    if mode == "rp":
        eps = float(cfg.params.get("eps", 1e-6))
        steps = int(cfg.params.get("steps", 10))
        if "random_pairs" in cfg.params:
            rng = make_rng(cfg.seed)
            pairs = [(random_vector(rng, 5), random_vector(rng, 5)) for _ in range(int(cfg.params["random_pairs"]))]
        else:
            pairs = [(cfg.vector("x"), cfg.vector("y"))]
        out = []
        ok = True
        for x, y in pairs:
            try:
                wit = rp_witness(op, x, y, eps, H, steps)
                out.append(wit.to_json())
                ok = ok and wit.success
            except WitnessNotFound as exc:
                out.append({"failure": str(exc), "diagnostics": exc.diagnostics})
                ok = False
        return ("pass" if ok else "fail"), {"pairs": out}, None, ()
    raise ConfigError(f"unknown relation mode {mode!r}")


def _worst(verdicts) -> Verdict:
    from .family import conjoin

    return conjoin(verdicts)


def exp_wm_filter(cfg: Config) -> Result:
    op = cfg.need_operator()
    F = cfg.family()
    try:
        gens = [WindowSet.from_json(g) for g in cfg.params["dual_generators"]]
    except (KeyError, TypeError, ValueError, ParameterError) as exc:
        raise ConfigError(f"params.dual_generators: {exc}") from None
    rng = make_rng(cfg.seed)
    space = cfg.space()
    kw = {"space": space} if space else {}
    if "points" in cfg.params:
        points = [cfg.vector_from(p, f"points[{i}]") for i, p in enumerate(cfg.params["points"])]
    else:
        points = [random_vector(rng, 4, **kw) for _ in range(3)]
    if "balls" in cfg.params:
        balls = [cfg.ball(b, f"balls[{i}]") for i, b in enumerate(cfg.params["balls"])]
    else:
        balls = [p[0] for p in random_ball_pairs(cfg.seed, 3, space=space)]
    radii = [float(r) for r in cfg.params.get("zero_radii", [0.5, 0.1])]
    try:
        rep = check_wm_filter(op, F, gens, points, balls, radii, cfg.horizon, cfg.eps_schedule)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    return _status_of(rep.verdict), rep.to_json(), None, ()


def exp_strong(cfg: Config) -> Result:
    op = cfg.need_operator()
    mode = cfg.params.get("mode", "st")
    K = int(cfg.params.get("K", 64))
    try:
        if mode == "st":
            rep = check_st(op, tol=cfg.tolerance, K=K, seed=cfg.seed)
        elif mode == "spt":
            rep = check_spt(op, n_tuple=int(cfg.params.get("n_tuple", 2)), tol=cfg.tolerance, K=K, seed=cfg.seed)
        else:
            raise ConfigError("params.mode must be 'st' or 'spt'")
    except (UnsupportedOperation, ParameterError) as exc:
        raise ConfigError(str(exc)) from None
    result = rep.to_json()
    result["crosscheck"] = st_implies_wm_crosscheck(op, rep, min(cfg.horizon, 200), cfg.seed).to_json()
    rows = None
    if rep.traces and hasattr(rep.traces[0], "norms"):
        rows = [(k, v) for k, v in enumerate(rep.traces[0].norms, start=1)]
    return rep.status, result, rows, ("n", "value")


def exp_gap_report(cfg: Config) -> Result:
    op = cfg.need_operator()
    rep = gap_report(op, cfg.horizon, cfg.seed)
    return ("pass" if rep.consistent else "fail"), rep.to_json(), None, ()


def exp_dichotomy(cfg: Config) -> Result:
    op = cfg.need_operator()
    delta = [float(d) for d in cfg.params.get("delta_grid", [1.0])]
    eps = cfg.params.get("eps_grid")
    try:
        res = dichotomy(op, cfg.horizon, delta, [float(e) for e in eps] if eps else None)
    except DichotomyInconclusive as exc:
        rows = list(enumerate(exc.profile, start=1))
        return "inconclusive", {"message": str(exc), "profile": exc.profile}, rows, ("n", "value")
    except (UnsupportedOperation, ParameterError) as exc:
        raise ConfigError(str(exc)) from None
    rows = list(enumerate(res.profile, start=1))
    return "pass", res.to_json(), rows, ("n", "value")


def exp_family_oracle(cfg: Config) -> Result:
    F = cfg.family()
    H = cfg.horizon
    try:
        oracle = exhaustive_family_oracle(H, F)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from None
    mismatches = []
    for A in all_subsets(H):
        got = window_membership(A, F).is_consistent
        if got != (frozenset(A.members) in oracle):
            mismatches.append(list(A.members))
    result = {"members": len(oracle), "subsets": 2**H, "mismatches": mismatches[:20],
              "mismatch_count": len(mismatches)}
    return ("pass" if not mismatches else "fail"), result, None, ()


EXPERIMENTS: dict[str, Callable[[Config], Result]] = {
    "orbit": exp_orbit,
    "hitting": exp_hitting,
    "classify-shift": exp_classify_shift,
    "criterion": exp_criterion,
    "relation": exp_relation,
    "wm-filter": exp_wm_filter,
    "strong": exp_strong,
    "gap-report": exp_gap_report,
    "dichotomy": exp_dichotomy,
    "family-oracle": exp_family_oracle,
}


def run_config(raw: dict, seed_override: int | None = None, base_dir: Path | None = None) -> tuple[int, dict]:
    """Execute one experiment; returns (exit code, report)."""
    cfg = Config(raw, seed_override)
    try:
        status, result, rows, columns = EXPERIMENTS[cfg.experiment](cfg)
    except ConfigError:
        raise
    except (ParameterError, UnsupportedOperation) as exc:
        raise ConfigError(str(exc)) from None
    echo = dict(raw)
    if seed_override is not None:
        echo["seed"] = seed_override
    report = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "experiment": cfg.experiment,
        "config": echo,
        "status": status,
        "result": result,
    }
    base_dir = base_dir or Path.cwd()
    if cfg.csv_path and rows is not None:
        write_series_csv(base_dir / cfg.csv_path, columns, rows)
    if cfg.json_path:
        (base_dir / cfg.json_path).write_text(dumps(report))
    return EXIT[status], report


# ---------------------------------------------------------------------------
# gallery


class Row:
    def __init__(self, name: str, expected: str, min_horizon: int, fn: Callable[[int], str]):
        self.name, self.expected, self.min_horizon, self.fn = name, expected, min_horizon, fn

    def run(self, horizon: int) -> str:
        if horizon < self.min_horizon:
            return "inconclusive"
        try:
            return self.fn(horizon)
        except DichotomyInconclusive:
            return "inconclusive"


def _block_identities(w: WeightSequence) -> Callable[[int], str]:
    def fn(H):
        ks = [k for k in range(1, 64) if example21_position(k) <= H]
        ok = all(w.prefix(example21_position(k) - 1) == 2**k and w.prefix(example21_position(k)) == 1 for k in ks)
        return "holds" if ok else "fails"
    return fn


def gallery_rows(w: WeightSequence, seed: int) -> list[Row]:
    Bw = BackwardShift(w)
    T2 = rolewicz(2)
    D = Differentiation()

    def classification(H):
        c = classify_shift(w, H)
        return f"hypercyclic={'yes' if c.hypercyclic_evidence else 'no'},mixing={'yes' if c.mixing_evidence else 'no'}"

    def hc_not_kitai(H):
        hc = verify_hc(Bw, build_shift_witness(Bw, "hc", horizon=H), H, 1e-9, 50, seed).passed
        kitai = verify_kitai(Bw, build_shift_witness(Bw, "kitai"), min(H, 200), 1e-9, 50, seed).passed
        return f"hc={'pass' if hc else 'fail'},kitai={'pass' if kitai else 'fail'}"

    def not_st(H):
        rep = check_st(Bw, seed=seed)
        if rep.passed:
            return "st=pass"
        return "st=fail(not surjective)" if rep.surjectivity is not None else "st=fail"

    def weak_mixing_window(H):
        e1 = SparseVector.basis(1)
        hits = hitting_sets(Bw, Ball(e1, 0.1), Ball(e1, 0.1), min(H, 200))
        v = classify_window(hits)
        return f"thick={v.thick.value.value},cofinite={v.cofinite.value.value}"

    def st_spt(op):
        def fn(H):
            st = check_st(op, seed=seed)
            spt = all(check_spt(op, n_tuple=n, seed=seed).passed for n in (2, 3, 4))
            cross = st_implies_wm_crosscheck(op, st, min(H, 200), seed).status
            return f"st={'pass' if st.passed else 'fail'},spt={'pass' if spt else 'fail'},wm_crosscheck={cross}"
        return fn

    def integration_bound(H):
        ps = poly_space()
        ok = all(integration_bound_check(SparseVector({m: 1}, ps), r, 30, 360).passed
                 for m in range(0, 6) for r in (1.0, 2.0))
        return "holds" if ok else "fails"

    def kitai_2b(H):
        rep = verify_kitai(T2, build_shift_witness(T2, "kitai"), min(H, 200), 1e-9, 50, seed)
        return "kitai=pass" if rep.passed else "kitai=fail"

    def battery(H):
        out = []
        for label, op in (("2B", T2), ("B/2", rolewicz(Fraction(1, 2))), ("B", BackwardShift()), ("Bw", Bw)):
            out.append(f"{label}:{dichotomy(op, min(H, 64)).kind}")
        return ",".join(out)

    return [
        Row("block-weight shift: product identities", "holds", 20, _block_identities(w)),
        Row("block-weight shift: classification", "hypercyclic=yes,mixing=no", 100, classification),
        Row("block-weight shift: HC along records, not Kitai", "hc=pass,kitai=fail", 1000, hc_not_kitai),
        Row("block-weight shift: hitting window of B(e1,.1)", "thick=consistent,cofinite=inconsistent", 200,
            weak_mixing_window),
        Row("block-weight shift: not strongly transitive", "st=fail(not surjective)", 1, not_st),
        Row("differentiation: integration decay bound", "holds", 1, integration_bound),
        Row("differentiation: strongly (product) transitive", "st=pass,spt=pass,wm_crosscheck=consistent", 1,
            st_spt(D)),
        Row("rolewicz 2B: strongly (product) transitive", "st=pass,spt=pass,wm_crosscheck=consistent", 1,
            st_spt(T2)),
        Row("rolewicz 2B: Kitai", "kitai=pass", 64, kitai_2b),
        Row("dichotomy battery", "2B:sensitive,B/2:equicontinuous,B:equicontinuous,Bw:sensitive", 1, battery),
    ]


def load_weights(spec: str | None) -> WeightSequence:
    """``example21``, ``constant:LAMBDA`` or a path to a JSON weight description."""
    if spec is None or spec == "example21":
        return WeightSequence.example21()
    if spec.startswith("constant:"):
        try:
            return WeightSequence.constant(spec.split(":", 1)[1])
        except (ValueError, ZeroDivisionError, ParameterError) as exc:
            raise ConfigError(f"bad constant weight: {exc}") from None
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"weights file {spec!r} not found")
    try:
        return WeightSequence.from_json(json.loads(path.read_text()))
    except (json.JSONDecodeError, ParameterError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"corrupted weights file {spec!r}: {exc}") from None


def run_gallery(horizon: int, weights: WeightSequence, seed: int, out=None) -> tuple[int, list[dict]]:
    out = out or sys.stdout
    rows = gallery_rows(weights, seed)
    results = []
    for row in rows:
        observed = row.run(horizon)
        if observed == "inconclusive":
            outcome = "inconclusive"
        else:
            outcome = "match" if observed == row.expected else "MISMATCH"
        results.append({"row": row.name, "expected": row.expected, "observed": observed, "outcome": outcome})
    width = max(len(r["row"]) for r in results)
    print(f"{'row':<{width}}  outcome       observed", file=out)
    for r in results:
        print(f"{r['row']:<{width}}  {r['outcome']:<12}  {r['observed']}", file=out)
    outcomes = {r["outcome"] for r in results}
    code = 1 if "MISMATCH" in outcomes else 2 if "inconclusive" in outcomes else 0
    return code, results


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    # usage errors are config errors; argparse's own status 2 means inconclusive here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="translab", description="Linear dynamics experiment runner")
    p.add_argument("--version", action="version", version=f"translab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    r.add_argument("--print", dest="print_report", action="store_true", help="print the report to stdout")

    g = sub.add_parser("gallery", help="reproduce the built-in example suite")
    g.add_argument("--horizon", type=int, default=2000)
    g.add_argument("--weights", default=None, help="example21, constant:LAMBDA or a JSON file")
    g.add_argument("--seed", type=int, default=0, help="seed of the fixed probe batteries")
    g.add_argument("--json", default=None, help="also write the table as JSON")

    c = sub.add_parser("classify-shift", help="growth scan of a weighted backward shift")
    c.add_argument("--weights", default="example21", help="example21, constant:LAMBDA or a JSON file")
    c.add_argument("--horizon", type=int, default=10_000)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "run":
            path = Path(args.config)
            try:
                raw = json.loads(path.read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read {path}: {exc}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path} is not valid JSON: {exc}") from None
            code, report = run_config(raw, args.seed, path.parent)
            if args.print_report or not report["config"].get("output", {}).get("json"):
                sys.stdout.write(dumps(report))
            print(f"status: {report['status']} ({time.perf_counter() - started:.2f}s)", file=sys.stderr)
            return code
        if args.command == "gallery":
            weights = load_weights(args.weights)
            code, results = run_gallery(args.horizon, weights, args.seed)
            if args.json:
                Path(args.json).write_text(dumps({"horizon": args.horizon, "rows": results}))
            return code
        if args.command == "classify-shift":
            weights = load_weights(args.weights)
            if args.horizon < 100:
                raise ConfigError("classify-shift needs --horizon >= 100")
            res = classify_shift(weights, args.horizon)
            sys.stdout.write(dumps({"weights": weights.to_json(), "result": res.to_json()}))
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except TranslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    return CONFIG_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
