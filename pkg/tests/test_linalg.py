from fractions import Fraction

from hypothesis import given, settings, strategies as st

from dgbv.linalg import (Matrix, Subspace, image_of, inverse, kernel_of, rank, rank_bareiss,
                         solve_linear)

small = st.integers(-3, 3)


def dense(draw_rows):
    return Matrix.from_rows(draw_rows)


matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


@given(matrices)
@settings(max_examples=60, deadline=None)
def test_rank_nullity_and_bareiss(rows):
    M = Matrix.from_rows(rows)
    assert rank(M) == rank_bareiss(rows)
    assert image_of(M).dim + kernel_of(M).dim == M.ncols


@given(matrices)
@settings(max_examples=60, deadline=None)
def test_kernel_vectors_are_killed(rows):
    M = Matrix.from_rows(rows)
    for v in kernel_of(M).basis:
        assert not M.apply(v)


@given(matrices, st.data())
@settings(max_examples=60, deadline=None)
def test_solve_reproduces_image_vectors(rows, data):
    M = Matrix.from_rows(rows)
    x = {j: Fraction(data.draw(small)) for j in range(M.ncols)}
    x = {j: c for j, c in x.items() if c}
    b = M.apply(x)
    for pivot in ("left", "right"):
        y = solve_linear(M, b, pivot=pivot)
        assert y is not None and M.apply(y) == b


def test_unsolvable_returns_none():
    M = Matrix.from_rows([[1, 0], [0, 0]])
    assert solve_linear(M, {1: 1}) is None


def test_inverse_exact():
    M = Matrix.from_rows([[2, 1], [1, 1]])
    Minv = inverse(M)
    assert (M @ Minv).rows() == Matrix.identity(2).rows()
    assert inverse(Matrix.from_rows([[1, 2], [2, 4]])) is None


def test_subspace_algebra():
    a = Subspace(3, [{0: 1}, {1: 1}])
    b = Subspace(3, [{1: 1}, {2: 1}])
    assert (a & b).dim == 1
    assert (a + b).dim == 3
    assert {1: 5} in a and {2: 1} not in a
