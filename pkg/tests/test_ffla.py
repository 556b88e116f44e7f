import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tilthall import ffla
from tilthall.errors import NonPrime, ShapeMismatch, Singular, UnsupportedSize
from tilthall.ffla import FMatrix, linear_solve

SMALL_Q = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1), (2, 4)]


def test_prime_fields():
    assert ffla.field_make(2, 1).q == 2
    assert ffla.field_make(3, 1).q == 3


def test_f4_reduction_polynomial():
    F = ffla.field_make(2, 2)
    assert F.q == 4
    # x^2 + x + 1, coefficients low degree first
    assert tuple(F.reduction) == (1, 1, 1)


def test_f4_reduction_is_the_only_irreducible_quadratic():
    # brute force: x^2 + bx + c irreducible over F_2 iff it has no root
    irreducible = [(c, b, 1) for b in range(2) for c in range(2)
                   if all((x * x + b * x + c) % 2 for x in range(2))]
    assert irreducible == [(1, 1, 1)]


def test_field_errors():
    with pytest.raises(NonPrime):
        ffla.field_make(4, 1)
    with pytest.raises(UnsupportedSize):
        ffla.field_make(2, 21)


def test_rank_identity():
    F = ffla.field_make(2)
    assert linear_solve(FMatrix.from_array(F, np.eye(3, dtype=int)), "rank") == 3


def test_nullspace_of_zero():
    F = ffla.field_make(3)
    ns = linear_solve(FMatrix.from_array(F, np.zeros((2, 3), dtype=int)), "nullspace-basis")
    assert ns.rows == 3


def test_self_inverse():
    F = ffla.field_make(2)
    A = FMatrix.from_array(F, [[1, 1], [0, 1]])
    assert linear_solve(A, "inverse").array().tolist() == [[1, 1], [0, 1]]


def test_singular_and_shape_errors():
    F = ffla.field_make(3)
    with pytest.raises(Singular):
        linear_solve(FMatrix.from_array(F, [[1, 2], [2, 1]]), "inverse")
    with pytest.raises(ShapeMismatch):
        linear_solve(FMatrix.from_array(F, [[1, 2, 0]]), "inverse")
    with pytest.raises(ShapeMismatch):
        linear_solve(FMatrix.from_array(F, [[1, 2]]), "solve", FMatrix.from_array(F, [[1], [1]]))


def test_inconsistent_solve():
    F = ffla.field_make(2)
    r = linear_solve(FMatrix.from_array(F, [[1, 1], [1, 1]]), "solve", FMatrix.from_array(F, [[0], [1]]))
    assert not r.consistent
    assert r.nullspace.rows == 1


@pytest.mark.parametrize("p,e", SMALL_Q)
def test_field_axioms_exhaustive(p, e):
    F = ffla.field_make(p, e)
    els = np.arange(F.q, dtype=np.int64)
    a, b = np.meshgrid(els, els, indexing="ij")
    add = F.add(a, b)
    mul = F.mul(a, b)
    assert np.array_equal(add, add.T) and np.array_equal(mul, mul.T)
    assert np.array_equal(F.add(a, 0), a) and np.array_equal(F.mul(a, 1), a)
    assert np.all(F.add(els, F.neg(els)) == 0)
    nz = els[1:]
    assert np.all(F.mul(nz, np.array([F.inv(int(x)) for x in nz])) == 1)
    # associativity and distributivity over all triples
    for c in range(F.q):
        assert np.array_equal(F.add(add, c), F.add(a, F.add(b, c)))
        assert np.array_equal(F.mul(mul, c), F.mul(a, F.mul(b, c)))
        assert np.array_equal(F.mul(add, c), F.add(F.mul(a, c), F.mul(b, c)))


def matrices(max_rows=5, max_cols=5):
    @st.composite
    def build(draw):
        p, e = draw(st.sampled_from([(2, 1), (3, 1), (2, 2), (5, 1)]))
        F = ffla.field_make(p, e)
        r = draw(st.integers(1, max_rows))
        c = draw(st.integers(1, max_cols))
        vals = draw(st.lists(st.integers(0, F.q - 1), min_size=r * c, max_size=r * c))
        return F, np.array(vals, dtype=np.int64).reshape(r, c)
    return build()


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_nullity(case):
    F, A = case
    M = FMatrix.from_array(F, A)
    ns = linear_solve(M, "nullspace-basis")
    assert linear_solve(M, "rank") + ns.rows == A.shape[1]
    if ns.rows:
        assert not np.any(F.matmul(A, ns.array().T))


@settings(max_examples=150, deadline=None)
@given(matrices(4, 4))
def test_inverse_roundtrip(case):
    F, A = case
    n = min(A.shape)
    A = A[:n, :n]
    M = FMatrix.from_array(F, A)
    if linear_solve(M, "rank") < n:
        with pytest.raises(Singular):
            linear_solve(M, "inverse")
        return
    inv = linear_solve(M, "inverse").array()
    I = np.eye(n, dtype=np.int64)
    assert np.array_equal(F.matmul(A, inv), I) and np.array_equal(F.matmul(inv, A), I)


@settings(max_examples=150, deadline=None)
@given(matrices(), st.data())
def test_solve_particular(case, data):
    F, A = case
    x = np.array(data.draw(st.lists(st.integers(0, F.q - 1), min_size=A.shape[1], max_size=A.shape[1])),
                 dtype=np.int64).reshape(-1, 1)
    b = F.matmul(A, x)
    r = linear_solve(FMatrix.from_array(F, A), "solve", FMatrix.from_array(F, b))
    assert r.consistent
    assert np.array_equal(F.matmul(A, r.particular.array()), b)


@pytest.mark.parametrize("p,e", [(2, 2), (3, 2), (2, 3)])
def test_serialization_roundtrip(p, e):
    F = ffla.field_make(p, e)
    for x in range(F.q):
        s = F.serialize(x)
        assert isinstance(s, list) and len(s) == e
        assert F.deserialize(s) == x
