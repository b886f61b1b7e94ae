import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from translab.errors import ParameterError, UnsupportedOperation
from translab.operators import (
    BackwardShift, Differentiation, ForwardShift, Integration, Matrix, NotSurjectiveEvidence,
    ScalarMultiple, Translation, WeightSequence, effective_weights, example21_block_index,
    example21_position, example21_shift, operator_from_json, power_norm, preimage, right_inverse,
    rolewicz, surjectivity_probe, weight_products,
)
from translab.vectors import SparseVector, poly_space

fractions = st.fractions(min_value=-3, max_value=3, max_denominator=8)
lp_vectors = st.dictionaries(st.integers(1, 25), fractions, max_size=6).map(SparseVector)
poly_vectors = st.dictionaries(st.integers(0, 12), fractions, max_size=6).map(
    lambda d: SparseVector(d, poly_space()))

LP_OPS = [
    rolewicz(2), rolewicz(Fraction(1, 2)), example21_shift(), BackwardShift(),
    ForwardShift(WeightSequence.explicit([2, "1/3", 5])),
    BackwardShift(WeightSequence.explicit(["1/2", 3, -2])),
]
POLY_OPS = [Differentiation(), Integration(), Translation(Fraction(1, 2))]


def repeated(op, x, n):
    for _ in range(n):
        x = op.apply(x)
    return x


def test_example21_weights():
    w = WeightSequence.example21()
    assert [w(j) for j in range(1, 10)] == [2, Fraction(1, 2), 2, 2, Fraction(1, 4), 2, 2, 2, Fraction(1, 8)]
    assert [example21_position(k) for k in range(1, 5)] == [2, 5, 9, 14]
    assert all(example21_block_index(example21_position(k)) == k for k in range(1, 200))
    assert example21_block_index(3) == 0


@pytest.mark.parametrize("k", range(1, 21))
def test_example21_product_identities(k):
    w = WeightSequence.example21()
    p = k * (k + 3) // 2
    assert weight_products(w, p - 1) == 2**k
    assert weight_products(w, p) == 1


def test_weight_validation():
    with pytest.raises(ParameterError):
        WeightSequence.explicit([1, 0])
    with pytest.raises(ParameterError):
        WeightSequence.constant(0)
    with pytest.raises(ParameterError):
        WeightSequence.example21()(0)
    with pytest.raises(ParameterError):
        WeightSequence.from_json({"rule": "bogus"})


def test_explicit_weights_repeat_last():
    w = WeightSequence.explicit([3, 5])
    assert [w(j) for j in range(1, 5)] == [3, 5, 5, 5]
    assert w.window_product(2, 3) == 125


def test_scaled_weights_and_effective():
    op = ScalarMultiple(3, example21_shift())
    w = effective_weights(op)
    assert w(2) == Fraction(3, 2)
    assert w.window_product(1, 3) == 27 * 2 * Fraction(1, 2) * 2
    with pytest.raises(UnsupportedOperation):
        effective_weights(Differentiation())


@pytest.mark.parametrize("op", LP_OPS, ids=repr)
@given(x=lp_vectors, n=st.integers(0, 8))
def test_lp_iterate_matches_repeated_apply(op, x, n):
    assert op.iterate(x, n) == repeated(op, x, n)


@pytest.mark.parametrize("op", POLY_OPS, ids=repr)
@given(x=poly_vectors, n=st.integers(0, 6))
def test_poly_iterate_matches_repeated_apply(op, x, n):
    assert op.iterate(x, n) == repeated(op, x, n)


@pytest.mark.parametrize("op", LP_OPS + POLY_OPS, ids=repr)
@given(data=st.data(), m=st.integers(0, 5), n=st.integers(0, 5), a=fractions)
def test_linearity_and_semigroup(op, data, m, n, a):
    vecs = poly_vectors if op.space_kind == "poly" else lp_vectors
    x, y = data.draw(vecs), data.draw(vecs)
    assert op.apply(x + y * a) == op.apply(x) + op.apply(y) * a
    assert op.iterate(op.iterate(x, m), n) == op.iterate(x, m + n)


@given(lp_vectors, st.integers(0, 6))
def test_matrix_iterate(x, n):
    M = Matrix(((1, "1/2", 0), (0, 2, 1), ("-1/3", 0, 1)))
    x = x.truncate(3)
    assert M.iterate(x, n) == repeated(M, x, n)


def test_matrix_rejects_long_vectors():
    with pytest.raises(ParameterError):
        Matrix.identity(2).apply(SparseVector({3: 1}))
    with pytest.raises(ParameterError):
        Matrix(((1, 2),))
    assert Matrix(((0, 1), (0, 0))).dense_generalized_kernel
    assert not Matrix.identity(2).dense_generalized_kernel


@pytest.mark.parametrize("op", [rolewicz(2), example21_shift(), Differentiation()], ids=repr)
@given(data=st.data(), k=st.integers(0, 6))
def test_right_inverse(op, data, k):
    x = data.draw(poly_vectors if op.space_kind == "poly" else lp_vectors)
    R = right_inverse(op)
    assert op.iterate(R.iterate(x, k), k) == x


def test_right_inverse_unsupported():
    with pytest.raises(UnsupportedOperation):
        right_inverse(Translation())


def test_space_mismatch():
    with pytest.raises(ParameterError):
        Differentiation().apply(SparseVector({1: 1}))
    with pytest.raises(ParameterError):
        rolewicz(2).apply(SparseVector({1: 1}, poly_space()))


def test_negative_power():
    with pytest.raises(ParameterError):
        rolewicz(2).iterate(SparseVector({1: 1}), -1)


def test_power_norms():
    assert power_norm(rolewicz(2), 5).value == 32
    assert power_norm(rolewicz(Fraction(1, 2)), 3).value == 0.125
    pn = power_norm(example21_shift(), 3)
    assert pn.value == 8 and pn.stabilized
    assert power_norm(Matrix(((0, 2), (0, 0))), 1).value == pytest.approx(2.0)
    assert power_norm(Matrix(((0, 2), (0, 0))), 2).value == 0.0
    with pytest.raises(UnsupportedOperation):
        power_norm(Differentiation(), 1)


@given(st.integers(1, 30))
def test_power_norm_bounds_basis_images(n):
    op = example21_shift()
    pn = power_norm(op, n, index_range=512)
    for j in range(1, 60):
        assert op.iterate(SparseVector.basis(j + n), n).norm() <= pn.value * (1 + 1e-12)


def test_surjectivity_evidence_for_block_shift():
    op = example21_shift()
    res = preimage(op, surjectivity_probe(op))
    assert isinstance(res, NotSurjectiveEvidence)
    assert res.tail_mass >= res.bound
    heavy = dict(res.heavy)
    positions = [example21_position(k) + 1 for k in range(1, 40) if res.depth // 2 < example21_position(k) < res.depth]
    assert positions and all(heavy[j] == 1 for j in positions)


def test_preimage_for_surjective_shifts():
    for op in (rolewicz(2), rolewicz(Fraction(1, 2))):
        y = SparseVector({1: 1, 3: "1/2"})
        x = preimage(op, y)
        assert not isinstance(x, NotSurjectiveEvidence)
        assert op.apply(x) == y


def test_preimage_requires_shift():
    with pytest.raises(UnsupportedOperation):
        preimage(Differentiation(), SparseVector({0: 1}, poly_space()))


@pytest.mark.parametrize("op", LP_OPS + POLY_OPS + [Matrix(((1, "1/2"), (0, 3)))], ids=repr)
def test_operator_json_round_trip(op):
    back = operator_from_json(op.to_json())
    assert back.to_json() == op.to_json()
    x = SparseVector({0: 1, 2: 3}, poly_space()) if op.space_kind == "poly" else SparseVector({1: 1, 2: 3})
    assert back.apply(x) == op.apply(x)


def test_malformed_operator_json():
    with pytest.raises(ParameterError):
        operator_from_json({"kind": "nope"})
    with pytest.raises(ParameterError):
        operator_from_json([1, 2])


def test_differentiation_closed_form():
    f = SparseVector({5: 1}, poly_space())
    assert Differentiation().iterate(f, 3) == SparseVector({2: math.perm(5, 3)}, poly_space())
    assert Differentiation().iterate(f, 6).is_zero()
    assert Integration().iterate(SparseVector({0: 1}, poly_space()), 4) == SparseVector({4: Fraction(1, 24)}, poly_space())
