# tests/test_graded_core.py

import os
import sys
from fractions import Fraction

import pytest

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from utils.field_models import CellularInterval, Region, cellular_de_rham
from utils.graded_core import (
    ChainMap, CochainComplex, DegreeError, DeformationRetraction, GradedVectorSpace, NotAComplexError,
    PerturbationError, ShiftedPairing, acyclic_contraction, cohomology, cohomology_class, cohomology_dims,
    direct_sum, dual, euler_characteristic, express_modulo_boundaries, hpl, induced_map_on_cohomology,
    is_invariant, kunneth, pairing_invariance_defect, parse_matrix, shift, shift_pairing, tensor
)
from utils.linear_algebra import RationalMatrix


@pytest.fixture
def identity_complex():
    return CochainComplex.from_blocks({0: 1, 1: 1}, {0: RationalMatrix.identity(1)}, name='Q -> Q')


@pytest.fixture
def zero_complex():
    return CochainComplex.from_blocks({0: 1, 1: 1}, {0: RationalMatrix.zeros(1, 1)}, name='Q 0 Q')


@pytest.fixture
def open_interval():
    return cellular_de_rham(3, Region(0, 3, 'oo'))


# --- Graded space tests ---

def test_graded_space_offsets_and_labels():
    space = GradedVectorSpace({1: 2, -1: 1, 0: 0}, {1: ['x', 'y']})
    assert space.dims == {-1: 1, 1: 2}
    assert space.degree_list == [-1, 1, 1]
    assert space.indices(1) == [1, 2]
    assert space.flat_labels()[1:] == ['x', 'y']


def test_graded_space_rejects_bad_input():
    with pytest.raises(DegreeError):
        GradedVectorSpace({0: -1})
    with pytest.raises(DegreeError):
        GradedVectorSpace({0: 2}, {0: ['only one']})
    with pytest.raises(DegreeError):
        GradedVectorSpace.from_degree_list([1, 0])


# --- Complex tests ---

def test_complex_rejects_non_square_zero_differential():
    space = GradedVectorSpace({0: 1, 1: 1, 2: 1})
    d = RationalMatrix.from_entries(3, 3, [(1, 0, 1), (2, 1, 1)])
    with pytest.raises(NotAComplexError):
        CochainComplex(space, d)


def test_complex_rejects_inhomogeneous_differential():
    space = GradedVectorSpace({0: 1, 2: 1})
    with pytest.raises(DegreeError):
        CochainComplex(space, RationalMatrix.from_entries(2, 2, [(1, 0, 1)]))


def test_cohomology_of_two_term_complexes(identity_complex, zero_complex):
    assert cohomology_dims(identity_complex) == {0: 0, 1: 0}
    assert identity_complex.is_acyclic()
    assert cohomology_dims(zero_complex) == {0: 1, 1: 1}


def test_cohomology_of_open_interval(open_interval):
    result = cohomology(open_interval)
    assert result.nonzero_degrees() == [1]
    assert result.total() == 1
    rep = result.representatives[1][0]
    assert cohomology_class(open_interval, result, rep, 1) == [Fraction(1)]


def test_every_edge_is_cohomologous_in_the_open_interval(open_interval):
    edges = open_interval.space.indices(1)
    first = {edges[0]: Fraction(1)}
    for e in edges[1:]:
        assert express_modulo_boundaries(open_interval, {e: Fraction(1)}, [first], 1) == [Fraction(1)]


def test_cohomology_class_rejects_non_cocycles(open_interval):
    result = cohomology(open_interval)
    vertex = open_interval.space.indices(0)[0]
    with pytest.raises(NotAComplexError):
        cohomology_class(open_interval, result, {vertex: Fraction(1)}, 0)


def test_euler_characteristic_and_kunneth():
    assert euler_characteristic({0: 1, 1: 3, 2: 1}) == -1
    assert kunneth({0: 1, 1: 1}, {0: 1, 1: 1}) == {0: 1, 1: 2, 2: 1}


# --- Construction tests ---

def test_tensor_of_acyclic_is_acyclic(identity_complex):
    assert tensor(identity_complex, identity_complex).is_acyclic()


def test_tensor_satisfies_kunneth(open_interval, zero_complex):
    product = tensor(open_interval, zero_complex)
    computed = {k: v for k, v in cohomology_dims(product).items() if v}
    assert computed == kunneth(cohomology_dims(open_interval), cohomology_dims(zero_complex))


def test_shift_relabels_degrees_and_signs(identity_complex):
    assert shift(identity_complex, 0) is identity_complex
    shifted = shift(identity_complex, 1)
    assert shifted.space.dims == {-1: 1, 0: 1}
    assert shifted.differential == identity_complex.differential.scale(-1)


def test_dual_is_an_involution(open_interval):
    once = dual(open_interval)
    assert once.space.dims == {-1: 3, 0: 2}
    assert dual(once).differential == open_interval.differential
    assert dual(once).space.dims == open_interval.space.dims


def test_direct_sum_adds_cohomology(open_interval, zero_complex):
    total = direct_sum(open_interval, zero_complex)
    assert cohomology_dims(total) == {0: 1, 1: 2}


# --- Pairing tests ---

def test_pairing_rejects_wrong_degree_and_symmetry():
    space = GradedVectorSpace({0: 2})
    with pytest.raises(DegreeError):
        ShiftedPairing(space, RationalMatrix.from_entries(2, 2, [(0, 1, 1), (1, 0, 1)]), 1, 1)
    with pytest.raises(DegreeError):
        ShiftedPairing(space, RationalMatrix.from_entries(2, 2, [(0, 1, 1), (1, 0, 1)]), 0, -1)


def test_whitney_pairing_defect_is_the_telescoping_form():
    full = cellular_de_rham(2, Region(0, 2, 'cc'), support='full')
    pairing = CellularInterval(2, Region(0, 2, 'cc'), 'full').whitney_pairing()
    defect = pairing_invariance_defect(full, pairing)
    # f_N g_N - f_0 g_0 on the vertices v0, v1, v2
    assert defect.gram.submatrix([0, 1, 2], [0, 1, 2]).to_dense() == [[-1, 0, 0], [0, 0, 0], [0, 0, 1]]
    assert not is_invariant(full, pairing)


def test_zero_pairing_is_invariant(open_interval):
    assert is_invariant(open_interval, ShiftedPairing.zero(open_interval.space, -1))


def test_shift_pairing_flips_symmetry_and_raises_degree():
    space = GradedVectorSpace({0: 1, 1: 1})
    pairing = ShiftedPairing(space, RationalMatrix.from_entries(2, 2, [(0, 1, 1), (1, 0, -1)]), -1, -1)
    shifted = shift_pairing(pairing, 1)
    assert shifted.degree == 1
    assert shifted.symmetry == 1
    assert shifted.space.dims == {-1: 1, 0: 1}
    assert shifted.gram[0, 1] == shifted.gram[1, 0]


# --- Chain map and retraction tests ---

def test_chain_map_and_induced_map(open_interval):
    identity = ChainMap.identity(open_interval)
    assert identity.is_chain_map()
    assert induced_map_on_cohomology(identity, 1) == RationalMatrix.identity(1)


def test_acyclic_contraction(identity_complex):
    contraction = acyclic_contraction(identity_complex)
    assert contraction.check().all_hold


def test_acyclic_contraction_rejects_cohomology(zero_complex):
    with pytest.raises(NotAComplexError):
        acyclic_contraction(zero_complex)


def test_hpl_with_zero_perturbation_is_identity(identity_complex):
    contraction = acyclic_contraction(identity_complex)
    assert hpl(contraction, RationalMatrix.zeros(2, 2)) is contraction


def test_hpl_transports_a_perturbation(zero_complex):
    retraction = DeformationRetraction.identity(zero_complex)
    delta = RationalMatrix.from_entries(2, 2, [(1, 0, 1)])
    perturbed = hpl(retraction, delta)
    assert perturbed.small.differential == delta
    assert perturbed.check().all_hold
    assert perturbed.small.is_acyclic()


def test_hpl_rejects_non_square_zero_perturbation():
    space = GradedVectorSpace({0: 1, 1: 1, 2: 1})
    retraction = DeformationRetraction.identity(CochainComplex(space))
    delta = RationalMatrix.from_entries(3, 3, [(1, 0, 1), (2, 1, 1)])
    with pytest.raises(PerturbationError):
        hpl(retraction, delta)


def test_parse_matrix_checks_shape():
    assert parse_matrix([["1/2", 0]], 1, 2)[0, 0] == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_matrix([[1]], 2, 1)
