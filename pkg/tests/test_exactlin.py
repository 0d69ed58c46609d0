from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import dense_matmul, dense_rank, homology_dim, to_dense
from rht.errors import CompositionNotZero, NotAChainMap, NotInvertible
from rht.exactlin import (
    ChainReduction,
    SparseMatrix,
    fmt,
    homology,
    induced_on_homology,
    invert_homology_iso,
    kernel_basis,
    rank,
    rref,
    scalar,
    solve,
)

small = st.integers(min_value=-3, max_value=3)


def dense_st(max_rows=6, max_cols=6):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def test_scalar_and_fmt():
    assert fmt(scalar("6/4")) == "3/2"
    assert fmt(scalar(Fraction(-2, 1))) == "-2"
    assert fmt(scalar(0)) == "0"


def test_matrix_basics():
    A = SparseMatrix.from_dense([[1, 2], [0, 3]])
    assert A.shape == (2, 2)
    assert (A @ SparseMatrix.identity(2)) == A
    assert (A - A).is_zero()
    assert A.T.to_dense()[0][1] == 0
    assert A.apply({0: 1, 1: 1}) == {0: 3, 1: 3}


@given(dense_st())
def test_rank_matches_dense_oracle(rows):
    assert rank(SparseMatrix.from_dense(rows)) == dense_rank(rows)


@given(dense_st())
def test_kernel_basis_is_a_kernel_of_full_size(rows):
    A = SparseMatrix.from_dense(rows)
    K = kernel_basis(A)
    assert (A @ K).is_zero()
    assert K.cols == A.cols - dense_rank(rows)
    assert rank(K) == K.cols


@given(dense_st())
def test_rref_is_reduced(rows):
    R, piv, r = rref(SparseMatrix.from_dense(rows))
    assert r == dense_rank(rows)
    for i, p in enumerate(piv):
        col = R.column(p)
        assert col == {i: 1}


@given(dense_st(), st.lists(small, min_size=6, max_size=6))
def test_solve_consistent(rows, x):
    A = SparseMatrix.from_dense(rows)
    x = {j: scalar(v) for j, v in enumerate(x[: A.cols]) if v}
    b = A.apply(x)
    sol = solve(A, b)
    assert sol is not None and A.apply(sol) == b


def test_solve_inconsistent():
    A = SparseMatrix.from_dense([[1, 1], [1, 1]])
    assert solve(A, {0: 1}) is None


@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=4, max_size=4))
def test_inverse(rows):
    A = SparseMatrix.from_dense(rows)
    if dense_rank(rows) < 4:
        with pytest.raises(NotInvertible):
            invert_homology_iso(A)
    else:
        assert invert_homology_iso(A) @ A == SparseMatrix.identity(4)


def random_complex(data):
    """``C0 -> C1 -> C2`` with ``d1 d0 = 0``: d0 spans part of ker d1."""
    d1 = data.draw(dense_st(4, 6))
    D1 = SparseMatrix.from_dense(d1)
    K = kernel_basis(D1)
    k = K.cols
    mix = data.draw(st.lists(st.lists(small, min_size=3, max_size=3), min_size=k, max_size=k)) if k else []
    if k:
        D0 = K @ SparseMatrix.from_dense(mix)
    else:
        D0 = SparseMatrix(D1.cols, 3)
    return D0, D1


@given(st.data())
def test_homology_dims_against_oracle(data):
    D0, D1 = random_complex(data)
    H = homology(D0, D1)
    assert H.dim == homology_dim(to_dense(D0), to_dense(D1), D1.cols)
    for j in range(H.dim):
        e = [0] * H.dim
        e[j] = 1
        assert H.project(H.cycle_basis.column(j)) == e
    for j in range(D0.cols):
        assert not any(H.project(D0.column(j)))


@given(st.data())
def test_reduction_agrees_with_row_reduction(data):
    D0, D1 = random_complex(data)
    n0, n1, n2 = D0.cols, D1.cols, D1.rows
    mats = {-1: SparseMatrix(n0, 0), 0: D0, 1: D1, 2: SparseMatrix(0, n2)}
    dims = {0: n0, 1: n1, 2: n2}
    red = ChainReduction(lambda n: mats.get(n, SparseMatrix(0, 0)), lambda n: dims.get(n, 0), 0, 2)
    for n in range(3):
        dense = homology(mats[n - 1], mats[n])
        H = red.homology(n)
        assert H.dim == dense.dim
        # the two bases differ by an invertible change of coordinates
        P = H.project_matrix(dense.cycle_basis)
        Q = dense.project_matrix(H.cycle_basis)
        assert P @ Q == SparseMatrix.identity(H.dim)


def test_composition_not_zero():
    with pytest.raises(CompositionNotZero):
        homology(SparseMatrix.from_dense([[1]]), SparseMatrix.from_dense([[1]]))


def test_induced_on_homology_of_identity():
    D0 = SparseMatrix.from_dense([[1], [0]])
    D1 = SparseMatrix.from_dense([[0, 0]])
    H = homology(D0, D1)
    assert H.dim == 1
    assert induced_on_homology(SparseMatrix.identity(2), H, H) == SparseMatrix.identity(1)
    assert H.is_boundary({0: scalar(5)})


def test_projection_rejects_non_cycle():
    D0 = SparseMatrix(2, 0)
    D1 = SparseMatrix.from_dense([[1, 0]])
    H = homology(D0, D1)
    with pytest.raises(NotAChainMap):
        H.project({0: scalar(1)})


def test_dense_matmul_oracle_consistency():
    a = [[1, 2], [3, 4]]
    b = [[0, 1], [1, 0]]
    A, B = SparseMatrix.from_dense(a), SparseMatrix.from_dense(b)
    assert to_dense(A @ B) == dense_matmul(a, b)
