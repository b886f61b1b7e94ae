"""The eleven acceptance criteria, one test each.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import json
import shutil
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from translab.criteria import (
    build_shift_witness, classify_shift, verify_ftc, verify_hc, verify_kitai, verify_mixing_characterization,
)
from translab.family import (
    Cofinite, IndexSequence, Syndetic, TailFilter, Thick, WindowSet, exhaustive_family_table, generated_filter,
    window_membership,
)
from translab.operators import (
    BackwardShift, Differentiation, ForwardShift, Integration, Matrix, NotSurjectiveEvidence, ScalarMultiple,
    Translation, WeightSequence, example21_position, example21_shift, rolewicz, weight_products,
)
from translab.orbits import Equicontinuous, Sensitive, dichotomy
from translab.relations import classify_pair, pair_series, rp_witness
from translab.sampling import make_rng
from translab.strong import check_spt, check_st, integration_bound_check, st_implies_wm_crosscheck
from translab.vectors import SparseVector, poly_space

acceptance = pytest.mark.acceptance
ROOT = Path(__file__).resolve().parents[1]


@acceptance(1, "block-weight products: 2^k before each small weight, 1 at it (k <= 20, exact, < 1 s)")
def test_01_product_identities():
    t0 = time.perf_counter()
    w = WeightSequence.example21()
    for k in range(1, 21):
        n_k = k * (k + 3) // 2
        assert example21_position(k) == n_k
        assert weight_products(w, n_k - 1) == 2**k
        assert weight_products(w, n_k) == 1
    assert time.perf_counter() - t0 < 1.0


@acceptance(2, "shift classification at H = 10^4 and the 20-point constant grid (< 5 s)")
def test_02_shift_classification():
    t0 = time.perf_counter()
    c = classify_shift(WeightSequence.example21(), 10_000)
    assert c.hypercyclic_evidence and not c.mixing_evidence
    for k in range(20):
        lam = Fraction(1, 4) + Fraction(15 * k, 76)  # 20 points spanning [1/4, 4]
        c = classify_shift(WeightSequence.constant(lam), 10_000)
        assert c.hypercyclic_evidence == c.mixing_evidence == (abs(lam) > 1), lam
    assert time.perf_counter() - t0 < 5.0


@acceptance(3, "HC passes for the block shift along the auto-built n_k - 1; Kitai fails it, passes 2B (< 10 s)")
def test_03_criterion_suite():
    t0 = time.perf_counter()
    Bw, T2 = example21_shift(), rolewicz(2)
    # the builder's argmax-of-suffix-minimal-product scan, as specified
    witness = build_shift_witness(Bw, "hc", J=1, horizon=2000)
    assert witness.index_sequence.upto(2000) == IndexSequence("example21", offset=-1).upto(2000)
    hc = verify_hc(Bw, witness, 2000, tol=1e-9, samples=50, seed=0)
    kitai_bw = verify_kitai(Bw, build_shift_witness(Bw, "kitai"), 200, tol=1e-9, samples=50, seed=0)
    kitai_2b = verify_kitai(T2, build_shift_witness(T2, "kitai"), 200, tol=1e-9, samples=50, seed=0)
    elapsed = time.perf_counter() - t0
    assert not kitai_bw.passed
    assert kitai_2b.passed
    assert elapsed < 10.0
    worst = hc.worst["ii"]
    assert hc.passed, (
        f"HC along n_k - 1 fails condition (ii): sample {worst.sample} has ||S^n y|| = {worst.worst_after:g} "
        "after entering tol (||S^(n_k - 1) e_2|| = 2 for every k)")


@acceptance(4, "FTC(cofinite) and the mixing characterization agree on 2B, block shift, D (3/3)")
def test_04_mixing_round_trip():
    agree = 0
    outcomes = {}
    for name, op in (("2B", rolewicz(2)), ("Bw", example21_shift()), ("D", Differentiation())):
        w = build_shift_witness(op, "kitai")
        a = verify_ftc(op, w, 200, samples=50, seed=0, family=Cofinite())
        b = verify_mixing_characterization(op, w, 200, samples=50, seed=0)
        outcomes[name] = (a.passed, b.passed)
        agree += a.passed == b.passed
    assert agree == 3, outcomes
    assert outcomes == {"2B": (True, True), "Bw": (False, False), "D": (True, True)}


@acceptance(5, "ST/SPT pass for 2B and D (tuples <= 4), block shift fails via non-surjectivity; crosscheck")
def test_05_strong_transitivity():
    for op in (rolewicz(2), Differentiation()):
        st = check_st(op, seed=0)
        assert st.passed
        assert st_implies_wm_crosscheck(op, st, seed=0).status == "consistent"
        for size in range(1, 5):
            spt = check_spt(op, n_tuple=size, seed=size)
            assert spt.passed, (type(op).__name__, size)
    rep = check_st(example21_shift(), seed=0)
    assert not rep.passed
    ev = rep.surjectivity
    assert isinstance(ev, NotSurjectiveEvidence)
    comps = dict(ev.candidate.items())
    ks = [k for k in range(1, 40) if example21_position(k) + 1 <= ev.depth]
    assert all(comps[example21_position(k) + 1] == 1 for k in ks)


@acceptance(6, "integration decay bound on 50 seeded polynomials, r in {1, 2}, n <= 30; f = 1 tight to 1e-12")
def test_06_integration_bound():
    P = poly_space()
    rng = make_rng(2024)
    for _ in range(50):
        deg = int(rng.integers(0, 11))
        f = SparseVector({d: Fraction(int(rng.integers(-16, 17)), 8) for d in range(deg + 1)}, P)
        for r in (1.0, 2.0):
            rep = integration_bound_check(f, r, 30, grid_points=360, tol=1e-12)
            assert rep.passed, (f, r, [row for row in rep.rows if not row.holds][:1])
    one = integration_bound_check(SparseVector({0: 1}, P), 1.0, 30, grid_points=360)
    assert all(abs(row.ratio - 1) <= 1e-12 for row in one.rows)


def _exact_abs(v) -> Fraction:
    return abs(v) if isinstance(v, Fraction) else Fraction(abs(v))


@acceptance(7, "dichotomy: exactly one outcome for 2B, B/2, B, block shift; sensitive witnesses exact")
def test_07_dichotomy():
    ops = {"2B": rolewicz(2), "B/2": rolewicz(Fraction(1, 2)), "B": BackwardShift(), "Bw": example21_shift()}
    kinds = {}
    for name, op in ops.items():
        out = dichotomy(op)
        assert isinstance(out, Sensitive) != isinstance(out, Equicontinuous)
        kinds[name] = out.kind
        if isinstance(out, Sensitive):
            (xv,) = [v for _, v in out.x.items()]
            image = op.iterate(out.x, out.n)
            (iv,) = [v for _, v in image.items()]
            assert _exact_abs(xv) < Fraction(out.eps)
            assert _exact_abs(iv) >= Fraction(out.delta)
    assert kinds == {"2B": "sensitive", "B/2": "equicontinuous", "B": "equicontinuous", "Bw": "sensitive"}


@acceptance(8, "thick/syndetic duality over all 2^16 windows; oracle agreement on 2^12 for three families")
def test_08_family_oracle():
    H, L = 16, 4
    thick, synd = Thick(L), Syndetic(L - 1)
    for mask in range(1 << H):
        A = WindowSet.from_mask(mask, H)
        assert window_membership(A, thick).is_consistent != window_membership(A.complement(), synd).is_consistent
    H = 12
    families = [Cofinite(), TailFilter(IndexSequence("squares")),
                generated_filter([WindowSet.interval(k, H, H).union(WindowSet.of([1], H)) for k in (2, 5, 7)])]
    for F in families:
        table = exhaustive_family_table(H, F)
        for mask in range(1 << H):
            assert window_membership(WindowSet.from_mask(mask, H), F).is_consistent == bool(table[mask])


def _random_scalar(rng, exact):
    if exact:
        return Fraction(int(rng.integers(-12, 13)), int(rng.integers(1, 9)))
    return float(rng.uniform(-1, 1))


def _random_operator(kind, rng, exact):
    def weights():
        vals = [Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 9))) for _ in range(int(rng.integers(1, 6)))]
        return WeightSequence.explicit(vals if exact else [float(v) for v in vals])
    if kind == "backward_shift":
        return BackwardShift(weights())
    if kind == "forward_shift":
        return ForwardShift(weights())
    if kind == "scalar_multiple":
        lam = Fraction(int(rng.integers(1, 7)), int(rng.integers(1, 7)))
        return ScalarMultiple(lam if exact else float(lam), BackwardShift(weights()))
    if kind == "differentiation":
        return Differentiation()
    if kind == "integration":
        return Integration()
    if kind == "translation":
        a = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 5)))
        return Translation(a if exact else float(a))
    d = int(rng.integers(1, 5))
    return Matrix(tuple(tuple(_random_scalar(rng, exact) for _ in range(d)) for _ in range(d)))


KINDS = ("backward_shift", "forward_shift", "scalar_multiple", "differentiation", "integration", "translation",
         "matrix")


@acceptance(9, "closed-form iterate vs repeated apply: 1000 cases per kind, float < 1e-12, rational exact")
def test_09_iterate_oracle():
    rng = make_rng(9)
    worst = {}
    for kind in KINDS:
        worst[kind] = 0.0
        for case in range(1000):
            exact = case % 2 == 0
            op = _random_operator(kind, rng, exact)
            space = poly_space() if op.space_kind == "poly" else None
            lo = 0 if space else 1
            top = op.dim if isinstance(op, Matrix) else 12
            support = rng.choice(np.arange(lo, top + 1), size=min(4, top - lo + 1), replace=False)
            x = SparseVector({int(j): _random_scalar(rng, exact) for j in support}, space or SparseVector().space)
            n = int(rng.integers(0, 11))
            closed = op.iterate(x, n)
            repeated = x
            for _ in range(n):
                repeated = op.apply(repeated)
            if exact:
                assert closed == repeated, (kind, x, n)
            else:
                # relative to the size of the result: entries reach perm(12, 10) ~ 2e8 under D^10
                err = (closed - repeated).norm() / max(1.0, repeated.norm())
                worst[kind] = max(worst[kind], err)
    assert all(v < 1e-12 for v in worst.values()), worst


def _pairs(seed, count):
    rng = make_rng(seed)
    out = []
    for i in range(count):
        top = 12 if i % 2 else 150  # half the pairs outlive the window and are not asymptotic
        def vec():
            idx = rng.choice(np.arange(1, top + 1), size=int(rng.integers(1, 5)), replace=False)
            return SparseVector({int(j): Fraction(int(rng.integers(-8, 9)), 4) for j in idx})
        out.append((vec(), vec(), vec()))
    return out


@acceptance(10, "relations under 2B: invariance and symmetry on 200 pairs, 200/200 asymptotic <=> cofinite-proximal, rp on 10")
def test_10_relations():
    T2 = rolewicz(2)
    H = 100
    agree = 0
    seen = set()
    for x, y, v in _pairs(10, 200):
        base = classify_pair(pair_series(T2, x, y, H), {"asymptotic": None, "proximal": None,
                                                        "f_proximal": Cofinite()})
        moved = classify_pair(pair_series(T2, x + v, y + v, H), {"asymptotic": None, "proximal": None,
                                                                 "f_proximal": Cofinite()})
        swapped = classify_pair(pair_series(T2, y, x, H), {"asymptotic": None, "proximal": None,
                                                           "f_proximal": Cofinite()})
        for mode in base:
            assert base[mode].value == moved[mode].value == swapped[mode].value
        agree += base["asymptotic"].value == base["f_proximal"].value
        seen.add(base["asymptotic"].value.value)
    assert agree == 200
    assert seen == {"consistent", "inconsistent"}
    rng = make_rng(77)
    for _ in range(10):
        x = SparseVector({int(j): Fraction(int(rng.integers(-8, 9)), 4) for j in rng.choice(6, 3, replace=False) + 1})
        y = SparseVector({int(j): Fraction(int(rng.integers(-8, 9)), 4) for j in rng.choice(6, 3, replace=False) + 1})
        w = rp_witness(T2, x, y, eps=1e-6, horizon=200, steps=10)
        assert w.success and len(w.steps) <= 10


@acceptance(11, "repeated `translab run` with a fixed seed gives byte-identical JSON")
def test_11_determinism(tmp_path):
    exe = shutil.which("translab")
    cmd = [exe] if exe else [sys.executable, "-m", "translab"]
    for name in ("hc_block_shift", "strong_st_2b", "rp_2b", "gap_report_2b", "wm_filter_block_shift"):
        cfg = json.loads((ROOT / "configs" / f"{name}.json").read_text())
        cfg["output"] = {"json": "report.json"}
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg))
        outs = []
        for _ in range(2):
            subprocess.run(cmd + ["run", str(path), "--seed", "5"], capture_output=True, check=False)
            outs.append((tmp_path / "report.json").read_bytes())
        assert outs[0] == outs[1] and outs[0], name


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-rA"]))
