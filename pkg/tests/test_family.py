import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from translab.errors import HorizonMismatch, ParameterError
from translab.family import (
    ClassifyParams, Cofinite, IndexSequence, Infinite, Syndetic, Thick, TailFilter,
    UpwardClosure, Verdict, WindowSet, all_subsets, check_eps_schedule, classify_window, conjoin,
    default_eps_schedule, dual_membership, exhaustive_family_oracle, exhaustive_family_table,
    f_limit, family_from_json, generated_filter, tilde_membership, window_membership,
)


def window(horizon=40):
    return st.sets(st.integers(1, horizon)).map(lambda s: WindowSet.of(s, horizon))


def windows_pair(horizon=40):
    return st.tuples(window(horizon), window(horizon))


FAMILIES = [
    Cofinite(), Infinite(), Thick(4), Syndetic(3), TailFilter(IndexSequence("squares")),
    TailFilter(IndexSequence("example21")),
    generated_filter([WindowSet.interval(k, 40, 40) for k in (3, 8, 15)]),
    UpwardClosure((WindowSet.of([2, 7], 40), WindowSet.of([30], 40))),
]


# -- verdicts --------------------------------------------------------------

def test_inconsistent_needs_witness():
    with pytest.raises(ValueError):
        Verdict.inconsistent("no witness", None)


def test_conjoin_priority():
    c, i = Verdict.consistent(), Verdict.inconclusive("?")
    x = Verdict.inconsistent("bad", 3)
    assert conjoin([c, i, x]).is_inconsistent
    assert conjoin([c, i]).is_inconclusive
    assert conjoin([c, c]).is_consistent


# -- window sets -----------------------------------------------------------

def test_window_set_validation():
    with pytest.raises(ParameterError):
        WindowSet.of([0], 5)
    with pytest.raises(ParameterError):
        WindowSet.of([6], 5)
    with pytest.raises(ParameterError):
        WindowSet(0)
    assert WindowSet.of([3, 1, 3], 5).members == (1, 3)


def test_shift_thicken_interior():
    A = WindowSet.of([2, 3, 9], 10)
    assert A.shift(2).members == (4, 5)
    assert A.shift(-2) == WindowSet.of([1, 7], 8)
    assert A.thicken(1).members == (1, 2, 3, 4, 8, 9, 10)
    assert WindowSet.interval(3, 10, 10).interior(2).members == tuple(range(5, 11))


@given(window(30), st.integers(0, 4))
def test_interior_is_largest_fitting_set(A, n):
    B = A.interior(n)
    assert B.thicken(n).issubset(A)
    for m in range(1, A.horizon + 1):
        if m not in B:
            assert not WindowSet.of([m], A.horizon).thicken(n).issubset(A)


@given(window(30))
def test_mask_round_trip(A):
    assert WindowSet.from_mask(A.mask, A.horizon) == A
    assert WindowSet.from_json(A.to_json()) == A
    assert A.complement().complement() == A


# -- classification --------------------------------------------------------

def test_full_window_all_consistent():
    c = classify_window(WindowSet.full(100), ClassifyParams(10, 3, 0.5))
    assert c.cofinite.is_consistent and c.thick.is_consistent and c.syndetic.is_consistent


def test_even_numbers():
    c = classify_window(WindowSet.of(range(2, 101, 2), 100), ClassifyParams(10, 3, 0.5))
    assert c.syndetic.is_consistent
    assert c.thick.is_inconsistent and c.thick.witness["longest_run"] == 1
    assert c.cofinite.is_inconsistent and c.cofinite.witness == 51


def test_square_blocks_first_long_run():
    members = [n for k in range(1, 21) for n in range(k * k, k * k + k + 1) if n <= 400]
    A = WindowSet.of(members, 400)
    c = classify_window(A, ClassifyParams(10, 20, 0.5))
    # run length k + 1 first reaches 10 at k = 9, starting at 81; brute force agrees
    runs = [(k + 1, k * k) for k in range(1, 20)]
    first = min(start for length, start in runs if length >= 10)
    assert c.thick.is_consistent and c.thick.witness == first == 81


def test_classify_params_checked():
    with pytest.raises(ParameterError):
        classify_window(WindowSet.full(10), ClassifyParams(11, 3, 0.5))
    with pytest.raises(ParameterError):
        classify_window(WindowSet.full(10), ClassifyParams(3, 3, 1.0))
    assert ClassifyParams.defaults(100) == ClassifyParams(10, 10, 0.5)
    assert ClassifyParams.defaults(101) == ClassifyParams(10, 11, 0.5)


@given(window(40), st.integers(1, 40), st.integers(0, 40))
def test_classification_matches_definitions(A, L, g):
    flags = [n in A for n in range(1, 41)]
    runs, cur = [], 0
    for f in flags:
        cur = cur + 1 if f else 0
        runs.append(cur)
    c = classify_window(A, ClassifyParams(L, g, 0.5))
    assert c.thick.is_consistent == (max(runs, default=0) >= L)
    gaps, cur = [], 0
    for f in flags:
        cur = 0 if f else cur + 1
        gaps.append(cur)
    assert c.syndetic.is_consistent == (max(gaps) <= g)
    assert c.cofinite.is_consistent == all(flags[19:])


# -- membership ------------------------------------------------------------

def test_tail_filter_example_sequence():
    H = 200
    A = WindowSet.of(IndexSequence("example21").upto(H), H)
    v = window_membership(A, TailFilter(IndexSequence("example21")))
    assert v.is_consistent and v.witness == 2


def test_odd_numbers_not_cofinite():
    v = window_membership(WindowSet.of(range(1, 101, 2), 100), Cofinite())
    assert v.is_inconsistent and v.witness % 2 == 0


def test_generated_filter_member():
    chain = [WindowSet.interval(k, 30, 30) for k in (1, 5, 10)]
    F = generated_filter(chain)
    assert window_membership(WindowSet.interval(9, 30, 30), F).is_consistent
    assert window_membership(WindowSet.interval(11, 30, 30), F).is_inconsistent
    with pytest.raises(ParameterError):
        generated_filter([WindowSet.interval(5, 30, 30), WindowSet.interval(1, 30, 30)])
    with pytest.raises(ParameterError):
        generated_filter([])


def test_horizon_mismatch():
    F = UpwardClosure((WindowSet.of([3], 50),))
    with pytest.raises(HorizonMismatch):
        window_membership(WindowSet.full(20), F)
    with pytest.raises(HorizonMismatch):
        dual_membership(WindowSet.full(20), F)


def test_tail_filter_without_anchor_is_inconclusive():
    F = TailFilter(IndexSequence("explicit", (40, 50)))
    assert window_membership(WindowSet.full(60), F).is_inconclusive


def test_dual_examples():
    H = 100
    assert dual_membership(WindowSet.interval(50, H, H), Infinite()).is_consistent
    L = 10
    A = WindowSet.of(range(L // 2, H + 1, L // 2), H)
    assert dual_membership(A, Thick(L)).is_consistent
    B = WindowSet.of([1, 2], H)
    v = dual_membership(WindowSet.of([5], H), UpwardClosure((B,)))
    assert v.is_inconsistent and v.witness == B


@pytest.mark.parametrize("F", FAMILIES, ids=lambda f: f.kind)
@given(data=st.data())
def test_upward_closure_property(F, data):
    A = data.draw(window(40))
    extra = data.draw(window(40))
    B = A.union(extra)
    if window_membership(A, F).is_consistent:
        assert window_membership(B, F).is_consistent


@given(windows_pair(40))
def test_generated_filter_law(pair):
    A, B = pair
    F = FAMILIES[6]
    if window_membership(A, F).is_consistent and window_membership(B, F).is_consistent:
        assert window_membership(A.intersection(B), F).is_consistent


@given(windows_pair(40))
def test_tail_filter_law(pair):
    A, B = pair
    F = TailFilter(IndexSequence("squares"))
    if window_membership(A, F).is_consistent and window_membership(B, F).is_consistent:
        assert window_membership(A.intersection(B), F).is_consistent


# -- tilde -----------------------------------------------------------------

def test_tilde_examples():
    F = TailFilter(IndexSequence("squares"))
    H = 400
    A = WindowSet.clipped([n for k in range(1, 21) for n in range(k * k - 3, k * k + 4)], H)
    assert tilde_membership(A, F, 3).is_consistent
    v = tilde_membership(A, F, 4)
    assert v.is_inconsistent and v.witness["largest_passing"] == 3
    assert tilde_membership(WindowSet.full(64), Thick(), None).is_consistent
    chain = [WindowSet.interval(k, 64, 64) for k in (2, 10, 20)]
    B = chain[1].thicken(5)
    assert tilde_membership(B, generated_filter(chain), 5).is_consistent


@pytest.mark.parametrize("F", FAMILIES, ids=lambda f: f.kind)
@given(data=st.data())
def test_tilde_implies_membership(F, data):
    A = data.draw(window(40))
    N = data.draw(st.integers(1, 4))
    if tilde_membership(A, F, N).is_consistent:
        assert window_membership(A, F).is_consistent


def thick_block_windows(horizon=60):
    # unions of intervals so that tilde verdicts are not vacuous
    interval = st.tuples(st.integers(1, horizon), st.integers(0, horizon))
    return st.lists(interval, max_size=6).map(
        lambda ivs: WindowSet.clipped([n for a, ln in ivs for n in range(a, a + ln)], horizon))


@pytest.mark.parametrize("F", [Cofinite(), Thick(5), Syndetic(6)], ids=lambda f: f.kind)
@given(A=thick_block_windows(), N=st.integers(1, 4), i=st.integers(-4, 4))
def test_tilde_shift_stability(F, A, N, i):
    assume(abs(i) <= N)
    if tilde_membership(A, F, N).is_consistent:
        assert window_membership(A.shift(i), F).is_consistent


@given(A=thick_block_windows(), N=st.integers(1, 4), i=st.integers(-4, 4))
def test_tilde_shift_stability_tail_filter_with_margin(A, N, i):
    # anchored families are shift stable once the anchor clears the window edges
    assume(abs(i) <= N)
    F = TailFilter(IndexSequence("squares"))
    inner = window_membership(A.interior(N), F)
    assume(inner.is_consistent and N < inner.witness <= F.theta * (A.horizon - N))
    assert tilde_membership(A, F, N).is_consistent
    assert window_membership(A.shift(i), F).is_consistent


# -- F-limits --------------------------------------------------------------

def test_f_limit_examples():
    geometric = [2.0**-n for n in range(1, 101)]
    assert f_limit(geometric, Cofinite()).is_consistent
    assert f_limit([1.0] * 50, Thick(), [0.5]).is_inconsistent
    with pytest.raises(ParameterError):
        f_limit(geometric, Cofinite(), [0.1, 0.2])


def test_f_limit_block_shift_orbit():
    # 1 / (w_1 ... w_n) is 2^-k at n = n_k - 1 and 1 at n = n_k
    from translab.operators import WeightSequence
    w = WeightSequence.example21()
    d = [float(1 / w.prefix(n)) for n in range(1, 301)]
    assert f_limit(d, Cofinite(), [2.0**-3]).is_inconsistent
    assert f_limit(d, TailFilter(IndexSequence("example21", offset=-1)), [2.0**-3]).is_consistent


def test_eps_schedule():
    assert default_eps_schedule(3) == [0.5, 0.25, 0.125]
    with pytest.raises(ParameterError):
        check_eps_schedule([])
    with pytest.raises(ParameterError):
        check_eps_schedule([0.5, 0.5])


# -- serialization ---------------------------------------------------------

@pytest.mark.parametrize("F", FAMILIES, ids=lambda f: f.kind)
def test_family_json_round_trip(F):
    G = family_from_json(F.to_json())
    A = WindowSet.of(range(3, 41, 2), 40)
    assert G.membership(A).value == F.membership(A).value
    assert type(G) is type(F)


def test_family_json_rejects_unknown():
    with pytest.raises(ParameterError):
        family_from_json({"kind": "ultrafilter"})


# -- oracle ----------------------------------------------------------------

def test_oracle_examples():
    assert exhaustive_family_oracle(4, Cofinite()) == {
        frozenset(s) | {2, 3, 4} for s in ([], [1])}
    closure = exhaustive_family_oracle(4, UpwardClosure((WindowSet.of([1, 3], 4),)))
    assert all({1, 3} <= s for s in closure)
    assert len(closure) == 2 ** (4 - 2)
    with pytest.raises(ParameterError):
        exhaustive_family_oracle(21, Cofinite())


@pytest.mark.parametrize("F", [Cofinite(), Infinite(), Thick(3), Syndetic(2),
                               TailFilter(IndexSequence("squares")),
                               generated_filter([WindowSet.interval(k, 10, 10) for k in (2, 4, 5)]),
                               UpwardClosure((WindowSet.of([1, 3], 10), WindowSet.of([8], 10)))],
                         ids=lambda f: f.kind)
def test_membership_matches_oracle(F):
    H = 10
    table = exhaustive_family_table(H, F)
    for A in all_subsets(H):
        assert window_membership(A, F).is_consistent == bool(table[A.mask]), A


@pytest.mark.parametrize("F", [Cofinite(), Infinite(), Thick(3), Syndetic(2), Thick(), Syndetic(),
                               TailFilter(IndexSequence("squares")),
                               generated_filter([WindowSet.interval(k, 12, 12) for k in (2, 4, 5)]),
                               UpwardClosure((WindowSet.of([1, 3], 12), WindowSet.of([8, 9], 12)))],
                         ids=lambda f: f.kind)
def test_dual_matches_definition(F):
    H = 12
    members = np.flatnonzero(exhaustive_family_table(H, F)).astype(np.uint64)
    for mask in range(1 << H):
        meets_all = bool(np.all((members & np.uint64(mask)) != 0))
        assert dual_membership(WindowSet.from_mask(mask, H), F).is_consistent == meets_all, mask


def test_thick_syndetic_duality_small():
    H, L = 10, 3
    for A in all_subsets(H):
        thick = window_membership(A, Thick(L)).is_consistent
        assert thick == (not window_membership(A.complement(), Syndetic(L - 1)).is_consistent)


def test_default_parameters():
    assert Thick().length(100) == 10 and Syndetic().gap(101) == math.ceil(math.sqrt(101))
