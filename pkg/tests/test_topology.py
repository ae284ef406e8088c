# tests/test_topology.py

import os
import sys

import pytest

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from utils.algebras import symplectic_block
from utils.field_models import SpectralSurface, lagrangian_check
from utils.graded_core import ModelError
from utils.linear_algebra import RationalMatrix
from utils.topology import (
    PoissonData, SurfaceData, cp_pushforward, expected_surface_cohomology, higher_cs_boundary, induced_pairing,
    lefschetz_data, psm_expected_dims, psm_field_cohomology, psm_global_observables, pushforward_cocycle,
    surface_cells, surface_cohomology, surface_hodge
)


@pytest.fixture
def torus():
    return SurfaceData(1, 1)


# --- Surface tests ---

def test_surface_data_validation():
    assert SurfaceData(1, 2).h1 == 3
    with pytest.raises(ModelError):
        SurfaceData(-1, 1)
    with pytest.raises(ModelError):
        SurfaceData(1, 0)


def test_surface_cohomology_and_lefschetz(torus):
    absolute, relative = surface_cohomology(torus)
    assert absolute == {0: 1, 1: 2, 2: 0}
    assert relative == {0: 0, 1: 2, 2: 1}
    package = lefschetz_data(SurfaceData(2, 3))
    assert package.duality_holds()
    assert package.delta_rank == 4
    assert package.omega_nondegenerate


@pytest.mark.parametrize("genus, boundaries", [(0, 1), (0, 3), (1, 1), (1, 2), (2, 2), (3, 1)])
def test_cellular_surface_matches_closed_forms(genus, boundaries):
    surface = SurfaceData(genus, boundaries)
    cells = surface_cells(surface)
    assert cells.euler_characteristic == 2 - 2 * genus - boundaries
    assert cells.relative.dim == cells.absolute.dim - 2 * boundaries
    assert surface_cohomology(surface) == expected_surface_cohomology(surface)
    package = lefschetz_data(surface)
    assert package.delta.shape == (surface.h1, surface.h1)
    assert package.delta_rank == 2 * genus
    assert package.omega_nondegenerate
    assert package.cup_antisymmetric


def test_cup_product_pairs_the_torus_cycles(torus):
    package = lefschetz_data(torus)
    restricted = package.delta.transpose() @ package.omega
    assert restricted[0, 0] == restricted[1, 1] == 0
    assert restricted[0, 1] != 0
    assert restricted[1, 0] == -restricted[0, 1]


def test_poisson_data_must_be_antisymmetric():
    with pytest.raises(ModelError):
        PoissonData(RationalMatrix.identity(2))
    assert PoissonData(symplectic_block(3)).kernel_dim == 1


# --- Poisson sigma model tests ---

@pytest.mark.parametrize("pi", [RationalMatrix.zeros(2, 2), symplectic_block(2)])
def test_field_cohomology_matches_closed_form(torus, pi):
    poisson = PoissonData(pi)
    fields = psm_field_cohomology(torus, poisson)
    assert fields.dims == psm_expected_dims(torus, poisson)
    assert fields.euler_characteristic == 0
    assert induced_pairing(fields).is_nondegenerate()


def test_zero_bivector_doubles_the_torus_contribution(torus):
    assert psm_expected_dims(torus, PoissonData(RationalMatrix.zeros(2, 2))) == {0: 6, 1: 6}


@pytest.mark.parametrize("surface, pi, degree", [
    (SurfaceData(0, 1), RationalMatrix.zeros(1, 1), -1),
    (SurfaceData(0, 2), RationalMatrix.zeros(1, 1), -2),
    (SurfaceData(1, 1), symplectic_block(2), -2),
])
def test_global_observables_have_rank_one(surface, pi, degree):
    observables = psm_global_observables(surface, PoissonData(pi))
    assert observables.expected == (1, degree)
    assert (observables.rank, observables.degree) == (1, degree)


def test_global_observables_brute_force_oracle():
    observables = psm_global_observables(SurfaceData(0, 1), PoissonData(RationalMatrix.zeros(1, 1)),
                                         brute_force_cut=2)
    assert observables.truncated == {-1: 1}


# --- Chern-Simons canonical data tests ---

@pytest.mark.parametrize("genus", [0, 1, 2])
def test_surface_hodge_lagrangian(genus):
    model = surface_hodge(genus)
    dims = {-1: 1, 0: 2 * genus, 1: 1}
    assert model.boundary.space.dims == {k: v for k, v in dims.items() if v}
    verdict = lagrangian_check(model.boundary, model.pairing, model.lagrangian)
    assert verdict.all_hold
    assert len(model.lagrangian) == genus + 1


def test_surface_hodge_rejects_negative_genus():
    with pytest.raises(ModelError):
        surface_hodge(-1)


# --- Projective pushforward tests ---

def test_pushforward_pieces_for_n_one():
    result = cp_pushforward(1, SpectralSurface(0))
    assert result.pieces == {0: {0: 1, 1: 2, 2: 1}, 1: {0: 1, 1: 1}}
    assert result.form_degrees[(1, 0)] == 1
    assert result.dims == {-3: 1, -2: 2, -1: 2, 0: 1}
    assert not result.agrees_with_stated


def test_pushforward_ignores_nonzero_modes():
    assert cp_pushforward(2, SpectralSurface(1)).dims == cp_pushforward(2, SpectralSurface(0)).dims


def test_pushforward_rejects_small_n():
    with pytest.raises(ModelError):
        cp_pushforward(0, SpectralSurface(0))


def test_pushforward_cocycle_scales_with_volume_and_level():
    unit = pushforward_cocycle(1, 1, 1)
    assert unit.holds
    assert not unit.cocycle.is_zero()
    assert pushforward_cocycle(1, 1, 2).cocycle.gram == unit.cocycle.gram.scale(2)
    tripled = pushforward_cocycle(1, 3, 1)
    assert tripled.holds
    assert tripled.cocycle.gram == unit.cocycle.gram.scale(3)
    assert tripled.cocycle.gram != unit.expected
    assert pushforward_cocycle(1, 0, 1).cocycle.is_zero()


@pytest.mark.parametrize("n", [1, 2])
def test_higher_cs_boundary_is_lagrangian(n):
    model = higher_cs_boundary(n, SpectralSurface(1))
    assert model.dim == 12 * (2 * n + 1)
    assert len(model.lagrangian) == 6 * (2 * n + 1)
    assert lagrangian_check(model.boundary, model.pairing, model.lagrangian).all_hold


def test_product_cocycle_lives_on_the_middle_power():
    result = pushforward_cocycle(2, 1, 1)
    assert result.holds
    assert result.product_cocycle.nnz == result.cocycle.gram.nnz
    with pytest.raises(ModelError):
        higher_cs_boundary(0, SpectralSurface(1))
