# tests/test_field_models.py

import os
import sys
from fractions import Fraction

import pytest

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from utils.algebras import symplectic_block
from utils.field_models import (
    BulkBoundaryModel, CellularInterval, Region, SpectralSurface, bulk_fields, bump_cochains, cellular_de_rham,
    conditioned_fields, correspondence_maps, cosheaf_sequence, dolbeault_complex, extension_by_zero,
    generator_data, green_defect, koszul_strip_model, lagrangian_check, psm_half_space_model,
    quantum_cocycle_check, riemannian_condition_model, riemannian_toy, scalar_complex, slab_model,
    spectral_dolbeault, strip_contraction, structure_map, telescoping_form, topological_mechanics_model
)
from utils.graded_core import (
    CochainComplex, GradedVectorSpace, ModelError, ShiftedPairing, cohomology_dims, is_invariant
)
from utils.linear_algebra import RationalMatrix


def _nonzero(dims):
    return {k: v for k, v in dims.items() if v}


@pytest.fixture
def mechanics():
    return topological_mechanics_model(1)


@pytest.fixture
def strip():
    return koszul_strip_model(1)


@pytest.fixture
def skewed():
    return SpectralSurface(2, dbar={1: 3, 2: Fraction(1, 2)}, d={1: 1, 2: 5},
                           weights={0: 2, 1: 3, 2: Fraction(1, 3)})


# --- Interval tests ---

def test_compact_support_drops_open_end_vertices():
    interval = CellularInterval(3, Region(0, 3, 'oo'))
    assert interval.vertices == [1, 2]
    assert interval.edges == [0, 1, 2]
    assert interval.describe() == '(0,3)/3'
    assert CellularInterval(3, Region(0, 3, 'co')).vertices == [0, 1, 2]
    assert CellularInterval(3, Region(1, 2, 'oo'), 'full').vertices == [1, 2]


@pytest.mark.parametrize("cells, region, support", [
    (0, None, 'compact'),
    (3, Region(2, 2, 'oo'), 'compact'),
    (3, Region(0, 4, 'oo'), 'compact'),
    (3, Region(1, 3, 'co'), 'compact'),
    (3, Region(0, 2, 'oc'), 'compact'),
    (3, Region(0, 3, 'xx'), 'compact'),
    (3, Region(0, 3, 'oo'), 'everywhere'),
])
def test_interval_rejects_bad_regions(cells, region, support):
    with pytest.raises(ModelError):
        CellularInterval(cells, region, support)


def test_region_from_json():
    assert Region.from_json([0, 2, 'co']) == Region(0, 2, 'co')
    with pytest.raises(ModelError):
        Region.from_json([0, 2])


def test_cellular_cohomology_by_region_kind():
    assert _nonzero(cohomology_dims(cellular_de_rham(3, [0, 3, 'oo']))) == {1: 1}
    assert _nonzero(cohomology_dims(cellular_de_rham(3, [0, 3, 'co']))) == {}
    assert _nonzero(cohomology_dims(cellular_de_rham(3, [0, 3, 'cc']))) == {0: 1}


def test_bump_cochains_have_weight_one():
    for phi in bump_cochains(CellularInterval(4, Region(0, 4, 'co'))):
        assert sum(phi) == 1
    assert bump_cochains(CellularInterval(4))[2] == [Fraction(1, 4)] * 4


# --- Lagrangian tests ---

def test_lagrangian_check_on_mechanics(mechanics):
    assert lagrangian_check(mechanics.boundary, mechanics.pairing, [0]).all_hold
    verdict = lagrangian_check(mechanics.boundary, mechanics.pairing, [0, 1])
    assert not verdict.half_rank
    assert not verdict.isotropic


def test_boundary_differential_decomposition(mechanics):
    assert all(block.is_zero() for block in mechanics.decomposition().values())
    model = psm_half_space_model(symplectic_block(2))
    blocks = model.decomposition()
    assert blocks['Q_rel'] == model.boundary.differential
    assert blocks['Q_L'].is_zero()
    assert blocks['Q_perp'].is_zero()
    assert blocks['Q_L_to_perp'].is_zero()


def test_model_rejects_non_lagrangian(mechanics):
    with pytest.raises(ModelError):
        BulkBoundaryModel(mechanics.boundary, mechanics.pairing, [0, 1])


def test_closedness_and_l_to_complement_are_separate_verdicts():
    space = GradedVectorSpace({0: 1, 1: 1})
    complex_ = CochainComplex(space, RationalMatrix.from_entries(2, 2, [(1, 0, 1)]), name='Q -> Q')
    unpaired = lagrangian_check(complex_, ShiftedPairing.zero(space, -1, 1), [0])
    assert not unpaired.closed
    assert unpaired.no_l_to_complement
    paired = ShiftedPairing(space, RationalMatrix.from_entries(2, 2, [(0, 1, 1), (1, 0, 1)]), -1, 1)
    verdict = lagrangian_check(complex_, paired, [0])
    assert verdict.isotropic
    assert not verdict.closed
    assert not verdict.no_l_to_complement
    assert lagrangian_check(complex_, paired, [1]).all_hold


def test_riemannian_condition():
    complex_, pairing, plus, minus = riemannian_toy()
    condition = riemannian_condition_model(complex_, pairing, 1, plus, minus)
    assert condition.check.all_hold
    assert condition.d_minus == RationalMatrix.from_dense([[Fraction(1, 2)], [Fraction(-1, 2)]])


# --- Field tests ---

def test_green_form_is_the_telescoping_form(mechanics):
    full = bulk_fields(mechanics, CellularInterval(3))
    assert green_defect(full).gram == telescoping_form(mechanics, full)
    assert not green_defect(full).is_zero()
    half = conditioned_fields(mechanics, CellularInterval(3, Region(0, 3, 'co')))
    assert green_defect(half).is_zero()


def test_open_interval_fields_have_boundary_cohomology(mechanics):
    fields = conditioned_fields(mechanics, CellularInterval(3, Region(0, 3, 'oo')))
    assert _nonzero(cohomology_dims(fields.complex)) == {1: 2}
    generators, pairing = generator_data(fields)
    assert set(generators.space.dims) == {-1, 0}
    assert pairing.degree == 1


def test_extension_by_zero_is_a_basis_inclusion(mechanics):
    inner = conditioned_fields(mechanics, CellularInterval(4, Region(1, 3, 'oo')))
    outer = conditioned_fields(mechanics, CellularInterval(4, Region(0, 4, 'co')))
    inclusion = extension_by_zero(inner, outer)
    assert inclusion.shape == (outer.dim, inner.dim)
    assert inclusion.nnz == inner.dim
    with pytest.raises(ModelError):
        extension_by_zero(outer, inner)


def test_strip_is_acyclic(strip):
    contraction = strip_contraction(strip, 3)
    assert contraction.small.dim == 0
    assert contraction.check().all_hold


# --- Correspondence tests ---

@pytest.mark.parametrize("phi", [[1, 0, 0], [0, 0, 1], ["1/3", "1/3", "1/3"]])
def test_correspondence_retraction_near_end(mechanics, phi):
    corr = correspondence_maps(mechanics, CellularInterval(3, Region(0, 3, 'co')), [Fraction(w) for w in phi])
    assert corr.retraction.check().all_hold
    assert corr.whitney_value == Fraction(-1, 2)
    assert quantum_cocycle_check(mechanics, corr).holds


def test_correspondence_at_far_end(strip):
    corr = correspondence_maps(strip, CellularInterval(3, Region(0, 3, 'oc')), [0, 1, 0])
    assert corr.closed_end == 'right'
    assert corr.whitney_value == Fraction(1, 2)
    assert corr.retraction.check().all_hold


def test_reversing_the_closed_end_flips_the_whitney_value():
    model = spectral_dolbeault(SpectralSurface(1))
    near = quantum_cocycle_check(model, correspondence_maps(model, CellularInterval(3, Region(0, 3, 'co')),
                                                            [1, 0, 0]))
    far = quantum_cocycle_check(model, correspondence_maps(model, CellularInterval(3, Region(0, 3, 'oc')),
                                                           [0, 0, 1]))
    assert (near.whitney_value, far.whitney_value) == (Fraction(-1, 2), Fraction(1, 2))
    assert near.holds and far.holds
    assert not near.mu.is_zero()
    assert near.pulled_back.gram == near.mu.gram.scale(-1)
    assert near.pulled_back.gram != near.mu.gram
    assert far.pulled_back.gram == far.mu.gram


def test_correspondence_rejects_bad_input(mechanics):
    half = CellularInterval(3, Region(0, 3, 'co'))
    with pytest.raises(ModelError):
        correspondence_maps(mechanics, half, [1, 1, 0])
    with pytest.raises(ModelError):
        correspondence_maps(mechanics, half, [1, 0])
    with pytest.raises(ModelError):
        correspondence_maps(mechanics, CellularInterval(3), [1, 0, 0])
    with pytest.raises(ModelError):
        correspondence_maps(mechanics, CellularInterval(3, Region(0, 3, 'oc')), [1, 0, 0])


# --- Structure map and cosheaf tests ---

def test_structure_map_rejects_overlapping_sources(mechanics):
    first = CellularInterval(4, Region(0, 2, 'oo'))
    second = CellularInterval(4, Region(1, 3, 'oo'))
    with pytest.raises(ModelError):
        structure_map(mechanics, [first, second], CellularInterval(4, Region(0, 4, 'oo')), 2)


def test_structure_map_is_a_chain_map(mechanics):
    left = CellularInterval(4, Region(0, 2, 'oo'))
    right = CellularInterval(4, Region(2, 4, 'oo'))
    smap = structure_map(mechanics, [left, right], CellularInterval(4, Region(0, 4, 'oo')), 2, 1)
    assert smap.chain_map.is_chain_map()


def test_mayer_vietoris_is_exact(mechanics):
    first = CellularInterval(4, Region(0, 2, 'co'))
    second = CellularInterval(4, Region(1, 4, 'oo'))
    assert cosheaf_sequence(mechanics, first, second).all_exact
    with pytest.raises(ModelError):
        cosheaf_sequence(mechanics, second, first)


# --- Slab tests ---

@pytest.mark.parametrize("pairs", [0, 1])
def test_slab_matches_the_scalar(pairs):
    surface = SpectralSurface(pairs)
    fields = slab_model(surface, 2)
    assert green_defect(fields).is_zero()
    scalar, _ = scalar_complex(surface)
    assert _nonzero(cohomology_dims(scalar)) == {0: 1, 1: 1}
    assert _nonzero(cohomology_dims(fields.complex)) == _nonzero(cohomology_dims(scalar))


def test_spectral_dolbeault_boundary_data():
    model = spectral_dolbeault(SpectralSurface(1))
    assert model.boundary.space.total_dim == 12
    assert len(model.lagrangian) == 6
    assert lagrangian_check(model.boundary, model.pairing, model.lagrangian).all_hold
    assert lagrangian_check(model.boundary, model.pairing, model.far_lagrangian).all_hold
    assert not model.decomposition()['Q_rel'].is_zero()
    assert model.decomposition()['Q_L_to_perp'].is_zero()
    assert spectral_dolbeault(SpectralSurface(1), 2).pairing.gram == model.pairing.gram.scale(2)


def test_zero_mode_has_no_holomorphic_term():
    assert spectral_dolbeault(SpectralSurface(0)).decomposition()['Q_rel'].is_zero()


def test_spectrum_parameters_reach_the_dolbeault_complex(skewed):
    assert skewed.dbar_eigenvalue(-1) == -3
    assert skewed.d_eigenvalue(2) == 5
    assert skewed.mode_weight(-2) == Fraction(1, 3)
    assert SpectralSurface(2).d_eigenvalue(-2) == -4
    complex_, pairing = dolbeault_complex(skewed)
    assert is_invariant(complex_, pairing)
    assert _nonzero(cohomology_dims(complex_)) == {0: 1, 1: 2, 2: 1}
    assert spectral_dolbeault(skewed).pairing.gram != spectral_dolbeault(SpectralSurface(2)).pairing.gram


def test_slab_matches_the_scalar_for_a_skewed_spectrum(skewed):
    fields = slab_model(skewed, 2, 3)
    assert green_defect(fields).is_zero()
    assert _nonzero(cohomology_dims(fields.complex)) == _nonzero(cohomology_dims(scalar_complex(skewed)[0]))
    model = spectral_dolbeault(skewed)
    corr = correspondence_maps(model, CellularInterval(3, Region(0, 3, 'co')), ["1/3", "1/3", "1/3"])
    assert quantum_cocycle_check(model, corr).holds


@pytest.mark.parametrize("kwargs", [
    {'pairs': -1},
    {'pairs': 1, 'dbar': {2: 1}},
    {'pairs': 1, 'd': {0: 1}},
    {'pairs': 1, 'weights': {1: 0}},
    {'pairs': 1, 'weight': 0},
])
def test_spectral_surface_rejects_bad_spectra(kwargs):
    with pytest.raises(ModelError):
        SpectralSurface(**kwargs)
