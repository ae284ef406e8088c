# tests/test_linear_algebra.py

import os
import sys
from fractions import Fraction

import pytest
import sympy

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from utils.linear_algebra import (
    IncrementalReducer, RationalMatrix, format_fraction, inverse, is_invertible, kernel, rank, row_echelon,
    solve, to_fraction
)


@pytest.fixture
def singular():
    return RationalMatrix.from_dense([[1, 2, 3], [2, 4, 6], [1, 0, 1]])


@pytest.fixture
def invertible():
    return RationalMatrix.from_dense([[2, 1], ["1/2", 3]])


# --- Scalar tests ---

def test_to_fraction_accepts_ints_strings_and_fractions():
    assert to_fraction(3) == Fraction(3)
    assert to_fraction("-2/6") == Fraction(-1, 3)
    assert to_fraction(Fraction(5, 7)) == Fraction(5, 7)


@pytest.mark.parametrize("bad", ["abc", "1/0", True, 1.5])
def test_to_fraction_rejects_malformed_values(bad):
    with pytest.raises(ValueError):
        to_fraction(bad)


def test_format_fraction():
    assert format_fraction(Fraction(4, 2)) == "2"
    assert format_fraction(Fraction(-3, 9)) == "-1/3"


# --- Matrix construction tests ---

def test_from_entries_accumulates_and_drops_zeros():
    m = RationalMatrix.from_entries(2, 2, [(0, 0, 1), (0, 0, 2), (1, 1, 1), (1, 1, -1)])
    assert m[0, 0] == 3
    assert m.row(1) == {}
    assert m.nnz == 1


def test_from_dense_rejects_ragged_rows():
    with pytest.raises(ValueError):
        RationalMatrix.from_dense([[1, 2], [3]])


def test_out_of_range_entries_raise():
    with pytest.raises(IndexError):
        RationalMatrix(2, 2, {3: {0: 1}})


def test_stacking_and_block_diagonal():
    a = RationalMatrix.identity(2)
    b = RationalMatrix.from_dense([[5]])
    assert RationalMatrix.hstack([a, RationalMatrix.zeros(2, 1)]).shape == (2, 3)
    assert RationalMatrix.vstack([a, RationalMatrix.zeros(1, 2)]).shape == (3, 2)
    diag = RationalMatrix.block_diagonal([a, b])
    assert diag.to_dense() == [[1, 0, 0], [0, 1, 0], [0, 0, 5]]
    with pytest.raises(ValueError):
        RationalMatrix.hstack([a, b])


# --- Arithmetic tests ---

def test_product_transpose_and_apply(invertible):
    product = invertible @ invertible.transpose()
    assert product == product.T
    assert invertible.apply({0: 1, 1: 1}) == {0: Fraction(3), 1: Fraction(7, 2)}
    with pytest.raises(ValueError):
        invertible @ RationalMatrix.zeros(3, 1)


def test_kron_matches_index_convention():
    a = RationalMatrix.from_dense([[1, 2]])
    b = RationalMatrix.from_dense([[3], [4]])
    k = a.kron(b)
    assert k.shape == (2, 2)
    assert k.to_dense() == [[3, 6], [4, 8]]


def test_submatrix_and_columns(singular):
    sub = singular.submatrix([0, 2], [0, 2])
    assert sub.to_dense() == [[1, 3], [1, 1]]
    assert singular.columns()[1] == {0: 2, 1: 4}
    assert singular.column(1) == {0: 2, 1: 4}


# --- Elimination tests ---

def test_rank_agrees_with_sympy(singular, invertible):
    for m in (singular, invertible, singular.transpose(), RationalMatrix.zeros(3, 2)):
        oracle = sympy.Matrix(m.to_dense()).rank() if m.rows and m.cols else 0
        assert rank(m) == oracle


def test_kernel_vectors_are_annihilated(singular):
    basis = kernel(singular)
    assert len(basis) == 3 - rank(singular)
    for v in basis:
        assert singular.apply(v) == {}


def test_row_echelon_is_reduced(singular):
    reduced, pivots = row_echelon(singular)
    assert pivots == [0, 1]
    for col in pivots:
        assert reduced[col][col] == 1
        assert all(reduced[other].get(col, 0) == 0 for other in pivots if other != col)


def test_solve_consistent_and_inconsistent(singular):
    x = solve(singular, {0: 1, 1: 2, 2: 1})
    assert singular.apply(x) == {0: 1, 1: 2, 2: 1}
    assert solve(singular, {0: 1, 1: 0}) is None


def test_inverse(invertible, singular):
    assert is_invertible(invertible)
    assert inverse(invertible) @ invertible == RationalMatrix.identity(2)
    assert not is_invertible(singular)
    with pytest.raises(ValueError):
        inverse(singular)
    with pytest.raises(ValueError):
        inverse(RationalMatrix.zeros(2, 3))


def test_incremental_reducer_is_deterministic():
    reducer = IncrementalReducer()
    assert reducer.add({0: 1, 1: 1})
    assert reducer.add({1: 1})
    assert not reducer.add({0: 2, 1: 5})
    assert reducer.contains({0: 1})
    assert len(reducer) == 2
