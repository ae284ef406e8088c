# utils/topology.py
"""
Global data for surfaces and projective-space fibres.

A compact oriented surface M of genus g with b >= 1 boundary circles is triangulated from a polygon
whose unglued sides are the boundary circles. H(M), H(M, ∂M), the map δ: H^1(M, ∂M) -> H^1(M) and the
Lefschetz pairing Ω(α, β) = ∫ α ∪ β are all computed from its simplicial cochains; the E^0 page of the
Poisson sigma model is assembled from them.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from utils.bv_engine import FiniteBVResult, finite_bv_cohomology, finite_bv_truncated
from utils.field_models import (
    BulkBoundaryModel, CellularInterval, Region, SpectralSurface, boundary_cocycle, correspondence_maps,
    dolbeault_complex, spectral_dolbeault
)
from utils.graded_core import (
    ChainMap, CochainComplex, GradedVectorSpace, ModelError, ShiftedPairing, cohomology, cohomology_dims,
    euler_characteristic, induced_map_on_cohomology, is_invariant, shift, shift_pairing, tensor, tensor_basis,
    tensor_pairing
)
from utils.linear_algebra import RationalMatrix, rank

logger = logging.getLogger('BVFactorize.topology')


@dataclass(frozen=True)
class SurfaceData:
    genus: int
    boundaries: int

    def __post_init__(self):
        if self.genus < 0:
            raise ModelError(f"Genus must be non-negative, got {self.genus}")
        if self.boundaries < 1:
            raise ModelError(f"The surface needs at least one boundary component, got b={self.boundaries}")

    @property
    def h1(self) -> int:
        return 2 * self.genus + self.boundaries - 1


@dataclass
class PoissonData:
    """A constant Poisson bivector Π: V∨ -> V on V = Q^n."""
    pi: RationalMatrix

    def __post_init__(self):
        if self.pi.rows != self.pi.cols:
            raise ModelError(f"Π must be square, got {self.pi.shape}")
        if self.pi.transpose() != -self.pi:
            raise ModelError("Π must be antisymmetric")

    @property
    def dim(self) -> int:
        return self.pi.rows

    @property
    def kernel_dim(self) -> int:
        return self.dim - rank(self.pi)


@dataclass
class SurfaceCells:
    """
    Simplicial cochains of M glued from a polygon with side word Π [a_i, b_i] Π t_j d_j t_j^{-1}.

    The sides d_j stay unglued and form the boundary circles; every side is coned off to an interior
    vertex c. triangles holds (sign, e01, e12) per 2-simplex [c, tail, head] of a side.
    """
    surface: SurfaceData
    absolute: CochainComplex
    relative: CochainComplex
    interior: List[int]
    triangles: List[Tuple[int, int, int]]

    @property
    def euler_characteristic(self) -> int:
        return euler_characteristic(self.absolute.space.dims)

    def inclusion(self) -> ChainMap:
        """C(M, ∂M) -> C(M), the cochains vanishing on ∂M."""
        n = self.absolute.dim
        entries = [(i, r, 1) for r, i in enumerate(self.interior)]
        matrix = RationalMatrix.from_entries(n, len(self.interior), entries)
        return ChainMap(self.relative, self.absolute, matrix, name='C(M, ∂M) -> C(M)')

    def cup_integral(self, first: Dict[int, Fraction], second: Dict[int, Fraction]) -> Fraction:
        """∫_M first ∪ second for 1-cochains given in flat coordinates of the absolute complex."""
        total = Fraction(0)
        for sign, e01, e12 in self.triangles:
            total += sign * first.get(e01, 0) * second.get(e12, 0)
        return total


@lru_cache(maxsize=None)
def surface_cells(surface: SurfaceData) -> SurfaceCells:
    g, b = surface.genus, surface.boundaries
    v, c = 0, b + 1
    edges: List[Tuple[int, int]] = []
    labels: List[str] = []
    word: List[Tuple[int, int]] = []
    for i in range(g):
        edges += [(v, v), (v, v)]
        labels += [f"a{i}", f"b{i}"]
        alpha, beta = len(edges) - 2, len(edges) - 1
        word += [(alpha, 1), (beta, 1), (alpha, -1), (beta, -1)]
    for j in range(b):
        edges += [(v, 1 + j), (1 + j, 1 + j)]
        labels += [f"t{j}", f"d{j}"]
        t, d = len(edges) - 2, len(edges) - 1
        word += [(t, 1), (d, 1), (t, -1)]
    corners = [edges[e][0] if exponent > 0 else edges[e][1] for e, exponent in word]
    spokes = len(edges)
    edges += [(c, corner) for corner in corners]
    labels += [f"s{k}" for k in range(len(corners))]

    n_vertices, n_edges, n_faces = b + 2, len(edges), len(word)
    d0 = RationalMatrix.from_entries(n_edges, n_vertices, [(e, head, 1) for e, (_, head) in enumerate(edges)]
                                     + [(e, tail, -1) for e, (tail, _) in enumerate(edges)])
    faces = []
    d1_entries = []
    for k, (side, exponent) in enumerate(word):
        start, end = spokes + k, spokes + (k + 1) % len(word)
        to_tail, to_head = (start, end) if exponent > 0 else (end, start)
        faces.append((exponent, to_tail, side))
        d1_entries += [(k, side, 1), (k, to_head, -1), (k, to_tail, 1)]
    d1 = RationalMatrix.from_entries(n_faces, n_edges, d1_entries)
    vertex_labels = ['v'] + [f"w{j}" for j in range(b)] + ['c']
    absolute = CochainComplex.from_blocks({0: n_vertices, 1: n_edges, 2: n_faces}, {0: d0, 1: d1},
                                          labels={0: vertex_labels, 1: labels, 2: [f"T{k}" for k in range(n_faces)]},
                                          name=f"C(M_{g},{b})")

    edge_offset = n_vertices
    boundary = {1 + j for j in range(b)} | {edge_offset + 2 * g + 2 * j + 1 for j in range(b)}
    interior = [i for i in range(absolute.dim) if i not in boundary]
    relative = absolute.restrict(interior, name=f"C(M_{g},{b}, ∂)")
    triangles = [(sign, edge_offset + e01, edge_offset + e12) for sign, e01, e12 in faces]
    cells = SurfaceCells(surface, absolute, relative, interior, triangles)
    logger.debug(f"Cellular model of M_{g},{b}: {n_vertices} vertices, {n_edges} edges, {n_faces} triangles")
    return cells


def surface_cohomology(surface: SurfaceData) -> Tuple[Dict[int, int], Dict[int, int]]:
    """Dims of H(M) and H(M, ∂M) in degrees 0, 1, 2, computed from the triangulated polygon."""
    cells = surface_cells(surface)
    absolute, relative = cohomology(cells.absolute), cohomology(cells.relative)
    return ({k: absolute.dims.get(k, 0) for k in (0, 1, 2)},
            {k: relative.dims.get(k, 0) for k in (0, 1, 2)})


def expected_surface_cohomology(surface: SurfaceData) -> Tuple[Dict[int, int], Dict[int, int]]:
    h1 = surface.h1
    return {0: 1, 1: h1, 2: 0}, {0: 0, 1: h1, 2: 1}


@dataclass
class LefschetzPackage:
    absolute: Dict[int, int]
    relative: Dict[int, int]
    delta: RationalMatrix
    omega: RationalMatrix

    @property
    def delta_rank(self) -> int:
        return rank(self.delta)

    @property
    def omega_nondegenerate(self) -> bool:
        return rank(self.omega) == self.omega.rows

    def duality_holds(self) -> bool:
        return all(self.absolute[k] == self.relative[2 - k] for k in (0, 1, 2))

    @property
    def cup_antisymmetric(self) -> bool:
        """Ω(δx, y) = -Ω(δy, x) for x, y in H^1(M, ∂M)."""
        restricted = self.delta.transpose() @ self.omega
        return restricted.transpose() == -restricted


def lefschetz_data(surface: SurfaceData) -> LefschetzPackage:
    """δ: H^1(M, ∂M) -> H^1(M) induced by C(M, ∂M) ⊂ C(M) and Ω(α, β) = ∫ α ∪ β on H^1(M) x H^1(M, ∂M)."""
    cells = surface_cells(surface)
    absolute, relative = cohomology(cells.absolute), cohomology(cells.relative)
    inclusion = cells.inclusion()
    delta = induced_map_on_cohomology(inclusion, 1, relative, absolute)
    first = absolute.representatives.get(1, [])
    second = [inclusion.matrix.apply(rep) for rep in relative.representatives.get(1, [])]
    entries = [(i, j, cells.cup_integral(x, y)) for i, x in enumerate(first) for j, y in enumerate(second)]
    omega = RationalMatrix.from_entries(len(first), len(second), entries)
    return LefschetzPackage({k: absolute.dims.get(k, 0) for k in (0, 1, 2)},
                            {k: relative.dims.get(k, 0) for k in (0, 1, 2)}, delta, omega)


@dataclass
class FieldCohomology:
    """The E^0 page of the conditioned Poisson sigma model fields and its cohomology."""
    page: CochainComplex
    pairing: ShiftedPairing
    dims: Dict[int, int]
    representatives: Dict[int, List[Dict[int, Fraction]]] = field(default_factory=dict)

    @property
    def euler_characteristic(self) -> int:
        return euler_characteristic(self.dims)


def e0_page(surface: SurfaceData, poisson: PoissonData) -> Tuple[CochainComplex, ShiftedPairing]:
    """
    Degree 0: H^0(M) ⊗ V ⊕ H^1(M, ∂M) ⊗ V∨; degree 1: H^1(M) ⊗ V ⊕ H^2(M, ∂M) ⊗ V∨,
    with d = δ ⊗ Π and the degree -1 pairing built from Ω and the H^0 x H^2 duality.
    """
    package = lefschetz_data(surface)
    n, h1 = poisson.dim, package.omega.rows
    hn = h1 * n
    block = RationalMatrix.vstack([
        RationalMatrix.hstack([RationalMatrix.zeros(hn, n), package.delta.kron(poisson.pi)]),
        RationalMatrix.hstack([RationalMatrix.zeros(n, n), RationalMatrix.zeros(n, hn)]),
    ])
    labels = {0: [f"1⊗v{a}" for a in range(n)] + [f"r{j}⊗ν{a}" for j in range(h1) for a in range(n)],
              1: [f"h{j}⊗v{a}" for j in range(h1) for a in range(n)] + [f"vol⊗ν{a}" for a in range(n)]}
    page = CochainComplex.from_blocks({0: n + hn, 1: hn + n}, {0: block}, labels=labels, name='E0(M)')
    h0v, rel = list(range(n)), n
    absolute, top = n + hn, n + 2 * hn
    entries = []
    for i, j, value in package.omega.entries():
        for a in range(n):
            entries += [(absolute + i * n + a, rel + j * n + a, value), (rel + j * n + a, absolute + i * n + a, -value)]
    for a in h0v:
        entries += [(a, top + a, Fraction(1)), (top + a, a, Fraction(-1))]
    total = 2 * n + 2 * hn
    pairing = ShiftedPairing(page.space, RationalMatrix.from_entries(total, total, entries), -1, -1,
                             name='<,>_E0')
    return page, pairing


def psm_field_cohomology(surface: SurfaceData, poisson: PoissonData) -> FieldCohomology:
    """
    Raises:
        ModelError: if the E^0 pairing is not invariant under δ ⊗ Π
    """
    page, pairing = e0_page(surface, poisson)
    if not is_invariant(page, pairing):
        raise ModelError("The E0 pairing is not invariant; δ and Ω are incompatible")
    result = cohomology(page)
    dims = {k: result.dims.get(k, 0) for k in (0, 1)}
    logger.debug(f"PSM field cohomology for (g={surface.genus}, b={surface.boundaries}, dim V={poisson.dim}): {dims}")
    return FieldCohomology(page, pairing, dims, result.representatives)


def psm_expected_dims(surface: SurfaceData, poisson: PoissonData) -> Dict[int, int]:
    """(R^2g ⊗ ker Π) ⊕ (R^{b-1} ⊗ V∨) ⊕ V in degree 0 and its mirror in degree 1."""
    value = 2 * surface.genus * poisson.kernel_dim + (surface.boundaries - 1) * poisson.dim + poisson.dim
    return {0: value, 1: value}


def induced_pairing(fields: FieldCohomology) -> ShiftedPairing:
    """<,>_E0 restricted to the chosen cohomology representatives."""
    reps = [v for k in (0, 1) for v in fields.representatives.get(k, [])]
    degrees = [k for k in (0, 1) for _ in fields.representatives.get(k, [])]
    gram_entries = []
    for a, x in enumerate(reps):
        for b, y in enumerate(reps):
            value = fields.pairing.evaluate(x, y)
            if value:
                gram_entries.append((a, b, value))
    space = GradedVectorSpace.from_degree_list(degrees)
    return ShiftedPairing(space, RationalMatrix.from_entries(len(reps), len(reps), gram_entries),
                          fields.pairing.degree, fields.pairing.symmetry, name='<,>_H')


@dataclass
class GlobalObservables:
    result: FiniteBVResult
    expected: Tuple[int, int]
    truncated: Optional[Dict[int, int]] = None

    @property
    def rank(self) -> int:
        return self.result.rank

    @property
    def degree(self) -> Optional[int]:
        return self.result.degree


def psm_global_observables(surface: SurfaceData, poisson: PoissonData, window: int = 2,
                           brute_force_cut: Optional[int] = None) -> GlobalObservables:
    """
    Rank and degree of H(Sym(H(E_L(M))[1]), Δ) at hbar = 1.

    With brute_force_cut, the truncated elimination on Sym^{<= cut} is run as an independent oracle.

    Raises:
        ModelError: if the induced pairing is degenerate
    """
    fields = psm_field_cohomology(surface, poisson)
    pairing = shift_pairing(induced_pairing(fields), 1)
    if not pairing.is_nondegenerate():
        raise ModelError("The pairing induced on field cohomology is degenerate")
    result = finite_bv_cohomology(pairing, window)
    expected = (1, -(2 * surface.genus * poisson.kernel_dim + surface.boundaries * poisson.dim))
    truncated = finite_bv_truncated(pairing, brute_force_cut) if brute_force_cut is not None else None
    logger.info(f"Global observables (g={surface.genus}, b={surface.boundaries}, dim V={poisson.dim}): "
                f"rank {result.rank}, degree {result.degree}, expected {expected}")
    return GlobalObservables(result, expected, truncated)


# --- Chern-Simons boundary data ---

def surface_hodge(genus: int) -> BulkBoundaryModel:
    """
    V = H(Σ)[1] in degrees -1, 0, 1 with the shifted Poincaré pairing; L spans a_1..a_g and H^2.
    """
    if genus < 0:
        raise ModelError(f"Genus must be non-negative, got {genus}")
    labels = {-1: ['1'], 0: [f"a{i}" for i in range(genus)] + [f"b{i}" for i in range(genus)], 1: ['vol']}
    space = GradedVectorSpace({-1: 1, 0: 2 * genus, 1: 1}, labels)
    top = 2 * genus + 1
    entries = [(0, top, Fraction(1)), (top, 0, Fraction(1))]
    for i in range(genus):
        entries += [(1 + i, 1 + genus + i, Fraction(1)), (1 + genus + i, 1 + i, Fraction(-1))]
    unshifted = GradedVectorSpace({0: 1, 1: 2 * genus, 2: 1})
    poincare = ShiftedPairing(unshifted, RationalMatrix.from_entries(top + 1, top + 1, entries), -2, 1,
                              name='∫Σ')
    omega = shift_pairing(poincare, 1)
    omega = ShiftedPairing(space, omega.gram, omega.degree, omega.symmetry, name='Atiyah-Bott')
    lagrangian = list(range(1, 1 + genus)) + [top]
    return BulkBoundaryModel(CochainComplex(space, name='H(Σ)[1]'), omega, lagrangian,
                             name=f"CS canonical(g={genus})")


# --- projective-space pushforward ---

@dataclass
class PushforwardResult:
    n: int
    pieces: Dict[int, Dict[int, int]]
    form_degrees: Dict[Tuple[int, int], int]
    dims: Dict[int, int]
    stated: Dict[int, int]

    @property
    def agrees_with_stated(self) -> bool:
        return {k: v for k, v in self.dims.items() if v} == self.stated


def cp_pushforward(n: int, surface: SpectralSurface) -> PushforwardResult:
    """
    Cohomology of ⊕_{i + j <= n} Ω^{i,•}(Σ) ⊗ h^j with differential dbar + d, shifted by 2n + 1.

    Pieces j < n carry the full Dolbeault complex; the piece j = n carries Ω^{0,•} with dbar alone.
    """
    if n < 1:
        raise ModelError(f"n must be at least 1, got {n}")
    full, _ = dolbeault_complex(surface)
    holomorphic, _ = dolbeault_complex(surface, types=('00', '01'), dbar_only=True)
    pieces: Dict[int, Dict[int, int]] = {}
    form_degrees: Dict[Tuple[int, int], int] = {}
    dims: Dict[int, int] = {}
    for j in range(n + 1):
        piece = full if j < n else holomorphic
        local = {k: v for k, v in cohomology_dims(piece).items() if v}
        pieces[j] = local
        for form_degree, value in local.items():
            form_degrees[(j, form_degree)] = value
            degree = form_degree + 2 * j - 2 * n - 1
            dims[degree] = dims.get(degree, 0) + value
    stated = {-(2 * n + 2 * j): 1 for j in range(1, n)}
    result = PushforwardResult(n, pieces, form_degrees, dict(sorted(dims.items())), stated)
    if not result.agrees_with_stated:
        logger.warning(f"Pushforward for n={n} computes {result.dims}, the stated closed form is {stated}")
    return result


@dataclass
class PushforwardCocycle:
    """
    cocycle is the twisted cocycle of the product boundary model pushed forward along CP^{2n};
    expected is vol κ mu_Σ computed from the correspondence on Σ alone.
    """
    product: BulkBoundaryModel
    product_cocycle: RationalMatrix
    cocycle: ShiftedPairing
    expected: RationalMatrix

    @property
    def holds(self) -> bool:
        return self.cocycle.gram == self.expected


def projective_pairing(n: int, vol) -> ShiftedPairing:
    """vol times the Poincaré pairing on Q[h]/(h^{2n+1}), h in degree 2."""
    space = GradedVectorSpace({2 * a: 1 for a in range(2 * n + 1)}, {2 * a: [f"h^{a}"] for a in range(2 * n + 1)})
    entries = [(a, 2 * n - a, Fraction(vol)) for a in range(2 * n + 1)]
    return ShiftedPairing(space, RationalMatrix.from_entries(2 * n + 1, 2 * n + 1, entries), -4 * n, 1,
                          name='vol∫')


def projective_cohomology(n: int) -> CochainComplex:
    """H(CP^2n) with zero differential."""
    return CochainComplex(projective_pairing(n, 1).space, name=f"H(CP^{2 * n})")


def higher_cs_boundary(n: int, surface: SpectralSurface, kappa=1, vol=1) -> BulkBoundaryModel:
    """
    Boundary data of higher Chern-Simons theory on CP^{2n} x Σ x R>=0: Ω(Σ)[1] ⊗ H(CP^{2n}) with the
    pairing κ ∫_Σ ⊗ vol ∫_CP and L spanned by Ω^{i,•}(Σ) h^j with i + j > n.

    Raises:
        ModelError: if n < 1
    """
    if n < 1:
        raise ModelError(f"n must be at least 1, got {n}")
    sigma = spectral_dolbeault(surface)
    holomorphic = set(sigma.lagrangian)
    fibre = projective_pairing(n, vol)
    complex_ = tensor(sigma.boundary, projective_cohomology(n))
    pairing = tensor_pairing(sigma.pairing, fibre).scale(Fraction(kappa))
    basis = tensor_basis(sigma.boundary.space, fibre.space)
    lagrangian = [p for p, (x, j) in enumerate(basis) if (x in holomorphic) + j > n]
    return BulkBoundaryModel(complex_, pairing, lagrangian, name=f"higher CS(n={n}, κ={kappa}, vol={vol})",
                             check=bool(kappa))


def pushforward_cocycle(n: int, kappa, vol, surface: Optional[SpectralSurface] = None,
                        cells: int = 2) -> PushforwardCocycle:
    """
    mu_X(x, y) = <x, Q_rel y> on the complement of the product Lagrangian, restricted along
    Ω^{0,•}(Σ) -> Ω^{0,•}(Σ) h^n, the only piece the fibre integral sees.
    """
    surface = surface or SpectralSurface(pairs=1)
    kappa, vol = Fraction(kappa), Fraction(vol)
    product = higher_cs_boundary(n, surface, kappa, vol)
    complement = product.complement()
    product_cocycle = product.pairing.gram.submatrix(complement, product.lagrangian) @ \
        product.boundary.differential.submatrix(product.lagrangian, complement)

    sigma = spectral_dolbeault(surface)
    interval = CellularInterval(cells, Region(0, cells, 'co'))
    mu = boundary_cocycle(sigma, correspondence_maps(sigma, interval, [1] + [0] * (cells - 1)))
    fibre_space = projective_pairing(n, vol).space
    position = {pair: p for p, pair in enumerate(tensor_basis(sigma.boundary.space, fibre_space))}
    local = {p: c for c, p in enumerate(complement)}
    top = [local[position[(x, n)]] for x in sigma.complement()]
    integration = RationalMatrix.from_entries(len(complement), len(top), [(row, c, 1) for c, row in enumerate(top)])
    pushed = integration.transpose() @ product_cocycle @ integration
    cocycle = ShiftedPairing(mu.space, pushed, mu.degree, mu.symmetry, name='π_* mu_X', check=False)
    logger.debug(f"Product cocycle for n={n} has {product_cocycle.nnz} entries, {pushed.nnz} survive the pushforward")
    return PushforwardCocycle(product, product_cocycle, cocycle, mu.gram.scale(vol * kappa))
