# tests/test_bv_engine.py

import os
import sys
from fractions import Fraction

import pytest

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from utils.bv_engine import (
    SymAlgebra, SymComplex, SymElement, finite_bv_cohomology, finite_bv_truncated, laplacian_orderings_agree,
    seven_term_defect, specialize_hbar, sym_dimension, sym_map, sym_observables, sym_retraction,
    twisted_envelope
)
from utils.graded_core import (
    CochainComplex, DegreeError, GradedVectorSpace, ModelError, ShiftedPairing, TruncationError,
    acyclic_contraction, cohomology_dims
)
from utils.linear_algebra import RationalMatrix


def bv_pairing(k):
    space = GradedVectorSpace({-1: k, 0: k})
    entries = [(i, k + i, 1) for i in range(k)] + [(k + i, i, 1) for i in range(k)]
    return ShiftedPairing(space, RationalMatrix.from_entries(2 * k, 2 * k, entries), 1, 1, name='W')


@pytest.fixture
def pairing():
    # ξ in degree -1 paired with x in degree 0
    return bv_pairing(1)


@pytest.fixture
def generators(pairing):
    return CochainComplex(pairing.space, name='W')


# --- Sym algebra tests ---

def test_normal_form_signs():
    algebra = SymAlgebra([1, 1, 0], 3)
    assert algebra.normal_form((1, 0)) == (-1, (0, 1))
    assert algebra.normal_form((2, 0)) == (1, (0, 2))
    assert algebra.normal_form((0, 2, 0)) == (0, None)


def test_product_respects_cutoffs():
    algebra = SymAlgebra([0], 1)
    x = algebra.generator(0)
    with pytest.raises(TruncationError):
        algebra.product(x, x)
    assert algebra.product(x, x, enforce_cut=False) == SymElement({((0, 0), 0): 1})
    with pytest.raises(TruncationError):
        SymAlgebra([0], -1)


def test_monomial_count_matches_closed_form():
    algebra = SymAlgebra([-1, 0], 2)
    assert algebra.monomials() == [(), (0,), (1,), (0, 1), (1, 1)]
    assert len(algebra.monomials()) == sym_dimension(1, 1, 2)
    assert sym_dimension(0, 3, 3) == 8


def test_laplacian_contracts_paired_factors(pairing):
    algebra = SymAlgebra(pairing.space.degree_list, 3)
    assert algebra.laplacian(pairing.gram, (0, 1)) == {(): 1}
    assert algebra.laplacian(pairing.gram, (0, 1, 1)) == {(1,): 2}
    assert algebra.laplacian(pairing.gram, (1, 1)) == {}


def test_laplacian_is_second_order(pairing):
    algebra = SymAlgebra(pairing.space.degree_list, 3)
    for mono in algebra.monomials():
        assert laplacian_orderings_agree(algebra, pairing.gram, mono)
    assert seven_term_defect(algebra, pairing.gram, (0,), (1,), (1,)) == {}


# --- Element tests ---

def test_element_arithmetic_drops_zero_terms():
    a = SymElement({((0,), 0): 1, ((1,), 1): 2})
    assert (a - a).is_zero()
    assert (a + a) == a.scale(2)
    assert SymElement.unit(1).terms == {((), 1): Fraction(1)}


def test_element_json_layout():
    element = SymElement({((0, 1), 0): 2, ((0, 1), 1): Fraction(1, 2)})
    payload = element.to_json([-1, 0])
    assert payload == [{'monomial': [[-1, 0, 1], [0, 1, 1]], 'coeff': ['2', '1/2']}]
    assert SymElement.from_json(payload) == element


# --- Observable complex tests ---

def test_sym_complex_identities(generators, pairing):
    sym = SymComplex(generators, pairing, 2, 1)
    assert all(sym.identities().values())
    assert sym.dim == 10
    assert sym.sym_degree_indices(0, 0) == [sym.index[((), 0)]]


def test_sym_complex_applies_hbar_delta(generators, pairing):
    sym = SymComplex(generators, pairing, 2, 1)
    image = sym.apply_differential(SymElement({((0, 1), 0): 1}))
    assert image == SymElement({((), 1): 1})
    with pytest.raises(TruncationError):
        sym.vector(SymElement({((1, 1, 1), 0): 1}))


def test_sym_observables_without_hbar_forget_the_pairing(generators, pairing):
    quantum = sym_observables(generators, pairing, 2, 1)
    classical = sym_observables(generators, None, 2, 1)
    assert quantum.q_matrix == classical.q_matrix
    assert classical.delta_matrix.is_zero()
    assert not quantum.delta_matrix.is_zero()
    assert sym_observables(generators, pairing, 2).complex.differential == \
        sym_observables(generators, None, 2).complex.differential


def test_sym_complex_rejects_wrong_pairing_degree():
    space = GradedVectorSpace({0: 1, 1: 1})
    gram = RationalMatrix.from_entries(2, 2, [(0, 1, 1), (1, 0, -1)])
    with pytest.raises(DegreeError):
        SymComplex(CochainComplex(space), ShiftedPairing(space, gram, -1, -1), 2)


def test_specialized_hbar_has_truncation_artifacts(generators, pairing):
    sym = specialize_hbar(SymComplex(generators, pairing, 2, 1))
    assert sym.algebra.hbar_cut == 0
    assert cohomology_dims(sym.complex) == {-1: 1, 0: 2}


def test_zero_cocycle_gives_classical_envelope(generators):
    envelope = twisted_envelope(generators, ShiftedPairing.zero(generators.space, 1, 1), 2)
    assert envelope.pairing is None
    assert envelope.delta_matrix.is_zero()


def test_sym_map_of_identity(generators, pairing):
    sym = SymComplex(generators, pairing, 2)
    induced = sym_map(RationalMatrix.identity(2), sym, sym)
    assert induced.matrix == RationalMatrix.identity(sym.dim)
    with pytest.raises(DegreeError):
        sym_map(RationalMatrix.identity(3), sym, sym)


def test_sym_retraction_of_acyclic_complex():
    acyclic = CochainComplex.from_blocks({0: 1, 1: 1}, {0: RationalMatrix.identity(1)}, name='Q -> Q')
    result = sym_retraction(acyclic_contraction(acyclic), 2)
    assert result.small.dim == 1
    assert result.retraction.check().all_hold


# --- Finite BV tests ---

@pytest.mark.parametrize("k", [1, 2])
def test_finite_bv_closed_form(k):
    result = finite_bv_cohomology(bv_pairing(k))
    assert (result.rank, result.degree) == (1, -k)
    assert result.agrees


def test_truncated_oracle_matches(pairing):
    assert finite_bv_truncated(pairing, 2) == {-1: 1}


def test_finite_bv_rejects_degenerate_and_misplaced_generators():
    space = GradedVectorSpace({-1: 1, 0: 1})
    with pytest.raises(ModelError):
        finite_bv_cohomology(ShiftedPairing.zero(space, 1, 1))
    with pytest.raises(DegreeError):
        finite_bv_cohomology(ShiftedPairing.zero(GradedVectorSpace({-1: 1, 1: 1}), 1, 1))
