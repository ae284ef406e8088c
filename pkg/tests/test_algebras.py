# tests/test_algebras.py

import os
import sys
from fractions import Fraction

import pytest

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from utils.algebras import (
    ExteriorElement, FockElement, FockModule, PolyElement, PolyVector, WeylAlgebra, brylinski_homology,
    brylinski_window, change_basis, fock_action, koszul_pairing, lichnerowicz_cohomology, lichnerowicz_expected,
    random_basis_change, rank_deficient, star_product, symbol_map, symplectic_block, weyl_product
)
from utils.graded_core import ModelError
from utils.linear_algebra import RationalMatrix, is_invertible, rank
from utils.report_handler import VerificationReport
from verify_boundary_algebras import check_fock, check_weyl


@pytest.fixture
def omega():
    # ω(q, p) = 1
    return RationalMatrix.from_dense([[0, 1], [-1, 0]])


@pytest.fixture
def weyl(omega):
    return WeylAlgebra(omega, [0])


# --- Polynomial tests ---

def test_poly_element_rejects_wrong_arity():
    with pytest.raises(ModelError):
        PolyElement(2, {((1,), 0): 1})


def test_poly_element_calculus():
    x = PolyElement.variable(2, 0)
    square = x * x
    assert square.degree() == 2
    assert square.derivative(0) == x.scale(2)
    assert PolyElement.constant(2, 3, 2).specialize_hbar(2) == PolyElement.constant(2, 12)


# --- Weyl algebra tests ---

def test_weyl_commutator_is_hbar_omega(weyl, omega):
    for v in range(2):
        for w in range(2):
            commutator = weyl_product(weyl.generator(v), weyl.generator(w)) - \
                weyl_product(weyl.generator(w), weyl.generator(v))
            assert commutator == weyl.constant(omega[v, w], 1)


def test_weyl_product_is_associative(weyl):
    q, p = weyl.generator(0), weyl.generator(1)
    left = weyl_product(weyl_product(p, q), p)
    right = weyl_product(p, weyl_product(q, p))
    assert left == right


def test_weyl_algebra_rejects_bad_data(omega):
    with pytest.raises(ModelError):
        WeylAlgebra(RationalMatrix.identity(2), [0])
    with pytest.raises(ModelError):
        WeylAlgebra(omega, [0, 1])
    other = WeylAlgebra(omega, [0])
    with pytest.raises(ModelError):
        weyl_product(other.generator(0), WeylAlgebra(omega, [0]).generator(1))


def test_fock_module_action(weyl):
    fock = weyl.fock_space()
    q, p = weyl.generator(0), weyl.generator(1)
    assert fock_action(fock.vacuum(), q).is_zero()
    assert fock_action(fock.vacuum(), p) == fock.generator(0)
    assert fock_action(fock.generator(0), q) == FockElement(fock, {((0,), 1): -1})


def single_contraction_product(a, b):
    """ab + ħ C_ij ∂_i a ∂_j b, the normal-ordered product cut off after one contraction."""
    terms = dict((a * b).terms)
    for (i, j), c in a.algebra.contractions.items():
        for (exps, h), value in (a.derivative(i) * b.derivative(j)).terms.items():
            terms[(exps, h + 1)] = terms.get((exps, h + 1), 0) + c * value
    return a.algebra.element(terms)


def test_single_contraction_product_is_not_associative(weyl):
    q, p = weyl.generator(0), weyl.generator(1)
    square = weyl_product(p, p)
    left = single_contraction_product(single_contraction_product(square, q), q)
    right = single_contraction_product(square, single_contraction_product(q, q))
    assert left - right == weyl.constant(2, 2)
    assert weyl_product(weyl_product(square, q), q) == weyl_product(square, weyl_product(q, q))


def test_weyl_checks_flag_a_non_associative_product(weyl):
    report = VerificationReport('boundary-algebras', {})
    check_weyl(report, weyl, product=single_contraction_product)
    failed = report.failed_checks()
    assert [name for name in failed if name.startswith('(ab)c = a(bc)')]
    assert not [name for name in failed if name.startswith('vw - wv')]

    honest = VerificationReport('boundary-algebras', {})
    check_weyl(honest, weyl)
    assert honest.passed, honest.failed_checks()


def test_fock_checks_flag_the_opposite_product(weyl):
    report = VerificationReport('boundary-algebras', {})
    check_fock(report, weyl, 2, product=lambda a, b: weyl_product(b, a))
    assert report.failed_checks() == ['(f · a) · b = f · (ab) on generator pairs']

    honest = VerificationReport('boundary-algebras', {})
    check_fock(honest, weyl, 2)
    assert honest.passed, honest.failed_checks()


def test_fock_dimension():
    assert FockModule.dimension(2, 3) == 4
    assert FockModule.dimension(0, 0) == 1
    assert FockModule.dimension(0, 2) == 0


# --- Moyal tests ---

def test_star_commutator_is_hbar_pi():
    pi = symplectic_block(2)
    x0, x1 = PolyElement.variable(2, 0), PolyElement.variable(2, 1)
    commutator = star_product(x0, x1, pi) - star_product(x1, x0, pi)
    assert commutator == PolyElement.constant(2, 1, 1)


def test_star_product_with_zero_bivector_is_commutative():
    x0, x1 = PolyElement.variable(2, 0), PolyElement.variable(2, 1)
    assert star_product(x0, x1, RationalMatrix.zeros(2, 2)) == x0 * x1
    with pytest.raises(ModelError):
        star_product(x0, x1, RationalMatrix.zeros(3, 3))


def test_symbol_map_intertwines_moyal_and_normal_order(weyl, omega):
    q, p = PolyElement.variable(2, 0), PolyElement.variable(2, 1)
    assert symbol_map(star_product(p, q, omega), weyl) == weyl_product(weyl.generator(1), weyl.generator(0))
    assert symbol_map(star_product(q, p, omega), weyl) == weyl_product(weyl.generator(0), weyl.generator(1))


# --- Exterior algebra and Koszul pairing tests ---

def test_wedge_is_graded_commutative():
    e0, e1 = ExteriorElement.generator(2, 0), ExteriorElement.generator(2, 1)
    assert e0.wedge(e1) == ExteriorElement(2, {(0, 1): 1})
    assert e1.wedge(e0) == ExteriorElement(2, {(0, 1): -1})
    assert e0.wedge(e0) == ExteriorElement(2)


def test_koszul_pairing_restricts_to_augmentations():
    f = PolyElement.constant(2, 3) + PolyElement.variable(2, 0)
    assert koszul_pairing(f, ExteriorElement.unit(2)) == 3
    assert koszul_pairing(f, ExteriorElement.generator(2, 1)) == 0
    assert koszul_pairing(PolyElement.variable(2, 1), ExteriorElement.unit(2)) == 0
    with pytest.raises(ModelError):
        koszul_pairing(f, ExteriorElement.unit(3))


# --- Poisson complex tests ---

@pytest.mark.parametrize("pi", [RationalMatrix.zeros(2, 2), symplectic_block(2), rank_deficient(3)])
def test_lichnerowicz_matches_kernel_and_cokernel(pi):
    assert lichnerowicz_cohomology(pi, 3) == lichnerowicz_expected(pi, 3)


def test_lichnerowicz_rejects_small_cut():
    with pytest.raises(ModelError):
        lichnerowicz_cohomology(symplectic_block(2), 0)


def test_polyvector_bracket_lands_in_form_degree_one():
    pi = symplectic_block(2)
    x0 = PolyVector(2, {((1, 0), ()): 1})
    image = x0.lichnerowicz(pi)
    assert image.bidegrees() == [(0, 1)]
    assert image.terms == {((0, 0), (1,)): Fraction(-1)}


def test_brylinski_concentrates_in_window():
    pi = symplectic_block(2)
    assert brylinski_window(pi) == (-2, -2)
    assert brylinski_homology(pi, 2) == {-2: 1}
    assert brylinski_window(rank_deficient(3)) == (-3, -2)


def test_basis_change_preserves_rank():
    change = random_basis_change(3, seed=5)
    assert is_invertible(change)
    assert change == random_basis_change(3, seed=5)
    assert rank(change_basis(rank_deficient(3), change)) == 2
