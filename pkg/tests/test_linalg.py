from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from tropcount.linalg import Matrix, SolveResult, det, solve


def det_by_permutation_expansion(m: Matrix) -> Fraction:
    """Independent oracle: signed sum over permutations, fine for n <= 4."""
    assert m.rows == m.cols
    n = m.rows
    total = Fraction(0)
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        prod = Fraction(1)
        for i in range(n):
            prod *= m.at(i, perm[i])
        total += sign * prod
    return total


small_fractions = st.fractions(
    min_value=-6, max_value=6, max_denominator=4
)


def square_matrices(n):
    return st.lists(
        st.lists(small_fractions, min_size=n, max_size=n),
        min_size=n,
        max_size=n,
    ).map(Matrix.from_rows)


def test_det_identity():
    assert det(Matrix.identity(2)) == 1
    assert det(Matrix.identity(5)) == 1


def test_det_two_columns_hand_value():
    # columns (1,1) and (-2,1)
    m = Matrix.from_rows([[1, -2], [1, 1]])
    assert det(m) == 3


def test_det_matches_permutation_oracle_fixed():
    rows = [
        [1, 0, 1, 0],
        [0, 1, 0, 0],
        [1, 0, 0, 0],
        [0, 1, 0, 1],
    ]
    m = Matrix.from_rows(rows)
    assert det(m) == det_by_permutation_expansion(m) == -1


def test_det_rejects_non_square():
    with pytest.raises(ValueError):
        det(Matrix.from_rows([[1, 2, 3], [4, 5, 6]]))


@settings(max_examples=60, deadline=None)
@given(square_matrices(3))
def test_det_matches_permutation_oracle_random(m):
    assert det(m) == det_by_permutation_expansion(m)


@settings(max_examples=40, deadline=None)
@given(square_matrices(3), square_matrices(3))
def test_det_multiplicative(a, b):
    assert det(a.mul(b)) == det(a) * det(b)


@settings(max_examples=40, deadline=None)
@given(square_matrices(3), small_fractions, st.integers(0, 2))
def test_det_column_scaling(m, c, j):
    rows = [list(r) for r in m.row_lists()]
    for r in rows:
        r[j] *= c
    assert det(Matrix.from_rows(rows)) == c * det(m)


@settings(max_examples=40, deadline=None)
@given(square_matrices(3), st.integers(0, 2), st.integers(0, 2))
def test_det_alternating(m, i, j):
    rows = [list(r) for r in m.row_lists()]
    for r in rows:
        r[i], r[j] = r[j], r[i]
    swapped = det(Matrix.from_rows(rows))
    if i == j:
        assert swapped == det(m)
    else:
        assert swapped == -det(m)


def test_solve_identity():
    res = solve(Matrix.identity(3), [1, 2, Fraction(5, 2)])
    assert res.is_unique
    assert res.solution == (1, 2, Fraction(5, 2))


def test_solve_zero_matrix_nonzero_rhs():
    m = Matrix.from_rows([[0, 0], [0, 0]])
    res = solve(m, [1, 0])
    assert res.status == SolveResult.INCONSISTENT


def test_solve_underdetermined():
    m = Matrix.from_rows([[1, 1], [2, 2]])
    res = solve(m, [3, 6])
    assert res.status == SolveResult.UNDERDETERMINED


def test_solve_example_ev_system():
    # the 4x4 block pattern of a one-edge evaluation cell
    m = Matrix.from_rows(
        [
            [1, 0, 1, 0],
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 1, 0, 1],
        ]
    )
    rhs = [Fraction(7, 2), 4, 1, Fraction(-3)]
    res = solve(m, rhs)
    assert res.is_unique
    assert m.mul_vector(res.solution) == tuple(Fraction(x) for x in rhs)


@settings(max_examples=50, deadline=None)
@given(square_matrices(4), st.lists(small_fractions, min_size=4, max_size=4))
def test_solve_roundtrip(m, rhs):
    res = solve(m, rhs)
    if res.is_unique:
        assert det(m) != 0
        assert m.mul_vector(res.solution) == tuple(Fraction(x) for x in rhs)
    else:
        assert det(m) == 0


def test_solve_rhs_length_mismatch():
    with pytest.raises(ValueError):
        solve(Matrix.identity(2), [1, 2, 3])
