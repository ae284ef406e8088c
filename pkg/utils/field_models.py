# utils/field_models.py
"""
Finite models of bulk-boundary free theories.

The normal direction is a cellular interval [0, N] with vertices v_0..v_N (degree 0) and edges
e_0..e_{N-1} (degree 1); bulk fields on a region are cellular cochains tensored with the boundary complex
E_∂. Boundary surfaces are modelled spectrally: each Fourier mode carries a four-dimensional Dolbeault
block with rational eigenvalues.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from utils.bv_engine import SymComplex, SymElement, sym_map, twisted_envelope
from utils.graded_core import (
    ChainMap, CochainComplex, DeformationRetraction, GradedVectorSpace, ModelError, ShiftedPairing,
    acyclic_contraction, direct_sum, direct_sum_pairing, direct_sum_positions, is_invariant,
    pairing_invariance_defect, shift, shift_pairing, tensor, tensor_basis, tensor_pairing
)
from utils.linear_algebra import RationalMatrix, Vector, inverse, rank

logger = logging.getLogger('BVFactorize.field_models')

Cell = Tuple[str, int]
REGION_KINDS = ('co', 'oc', 'oo', 'cc')
SUPPORTS = ('compact', 'full')


# --- cellular intervals ---

@dataclass(frozen=True)
class Region:
    """Cells start..stop of the ambient interval; kind flags the left/right ends as closed or open."""
    start: int
    stop: int
    kind: str = 'oo'

    @classmethod
    def from_json(cls, payload: Sequence) -> 'Region':
        if len(payload) != 3:
            raise ModelError(f"Region must be [start, stop, kind], got {payload}")
        return cls(int(payload[0]), int(payload[1]), str(payload[2]))

    def to_json(self) -> list:
        return [self.start, self.stop, self.kind]

    @property
    def closed_left(self) -> bool:
        return self.kind[0] == 'c'

    @property
    def closed_right(self) -> bool:
        return self.kind[1] == 'c'


class CellularInterval:
    """
    A region of the cellular interval [0, N].

    With compact support the vertices at open ends are dropped, so extension by zero is a basis
    inclusion; closed ends must sit on the ambient boundary. With full support every vertex of the
    region's closure is kept.
    """

    def __init__(self, cells: int, region: Optional[Region] = None, support: str = 'compact'):
        if cells < 1:
            raise ModelError(f"An interval needs at least one cell, got {cells}")
        region = region or Region(0, cells, 'cc')
        if region.kind not in REGION_KINDS:
            raise ModelError(f"Unknown region kind '{region.kind}', expected one of {REGION_KINDS}")
        if support not in SUPPORTS:
            raise ModelError(f"Unknown support '{support}', expected one of {SUPPORTS}")
        if region.start >= region.stop:
            raise ModelError(f"Empty region [{region.start}, {region.stop}]")
        if region.start < 0 or region.stop > cells:
            raise ModelError(f"Region [{region.start}, {region.stop}] is not inside [0, {cells}]")
        if support == 'compact':
            if region.closed_left and region.start != 0:
                raise ModelError(f"Closed left end at {region.start} is not on the ambient boundary")
            if region.closed_right and region.stop != cells:
                raise ModelError(f"Closed right end at {region.stop} is not on the ambient boundary")
        self.cells = cells
        self.region = region
        self.support = support
        first = region.start if (support == 'full' or region.closed_left) else region.start + 1
        last = region.stop if (support == 'full' or region.closed_right) else region.stop - 1
        self.vertices: List[int] = list(range(first, last + 1))
        self.edges: List[int] = list(range(region.start, region.stop))

    @property
    def basis(self) -> List[Cell]:
        return [('v', i) for i in self.vertices] + [('e', j) for j in self.edges]

    def complex(self) -> CochainComplex:
        """d v_i = e_{i-1} - e_i on the retained cells."""
        basis = self.basis
        position = {cell: n for n, cell in enumerate(basis)}
        entries = []
        for i in self.vertices:
            column = position[('v', i)]
            if ('e', i - 1) in position:
                entries.append((position[('e', i - 1)], column, Fraction(1)))
            if ('e', i) in position:
                entries.append((position[('e', i)], column, Fraction(-1)))
        space = GradedVectorSpace({0: len(self.vertices), 1: len(self.edges)},
                                  {0: [f"v{i}" for i in self.vertices], 1: [f"e{j}" for j in self.edges]})
        n = len(basis)
        return CochainComplex(space, RationalMatrix.from_entries(n, n, entries),
                              name=f"C({self.describe()})")

    def whitney_pairing(self) -> ShiftedPairing:
        """W(v_i, e_j) = W(e_j, v_i) = 1/2 when v_i is an endpoint of e_j; degree -1, symmetric."""
        basis = self.basis
        position = {cell: n for n, cell in enumerate(basis)}
        half = Fraction(1, 2)
        entries = []
        for j in self.edges:
            for i in (j, j + 1):
                if ('v', i) in position:
                    entries.append((position[('v', i)], position[('e', j)], half))
                    entries.append((position[('e', j)], position[('v', i)], half))
        n = len(basis)
        space = GradedVectorSpace({0: len(self.vertices), 1: len(self.edges)})
        return ShiftedPairing(space, RationalMatrix.from_entries(n, n, entries), -1, 1, name='W')

    def describe(self) -> str:
        left = '[' if self.region.closed_left else '('
        right = ']' if self.region.closed_right else ')'
        return f"{left}{self.region.start},{self.region.stop}{right}/{self.cells}"

    def __repr__(self) -> str:
        return f"CellularInterval({self.describe()}, support={self.support})"


def cellular_de_rham(cells: int, region: Optional[Union[Region, Sequence]] = None,
                     support: str = 'compact') -> CochainComplex:
    if region is not None and not isinstance(region, Region):
        region = Region.from_json(region)
    return CellularInterval(cells, region, support).complex()


def bump_cochains(interval: CellularInterval) -> List[List[Fraction]]:
    """Three weight-one 1-cochains on the region's edges: first edge, last edge and uniform."""
    n = len(interval.edges)
    first = [Fraction(1)] + [Fraction(0)] * (n - 1)
    last = [Fraction(0)] * (n - 1) + [Fraction(1)]
    uniform = [Fraction(1, n)] * n
    return [first, last, uniform]


# --- Lagrangian boundary conditions ---

@dataclass
class LagrangianCheck:
    half_rank: bool
    isotropic: bool
    closed: bool
    no_l_to_complement: Optional[bool] = None
    complement_isotropic: Optional[bool] = None

    @property
    def all_hold(self) -> bool:
        required = [self.half_rank, self.isotropic, self.closed]
        if self.no_l_to_complement is not None:
            required.append(self.no_l_to_complement)
        return all(required)

    def to_dict(self) -> dict:
        return dict(vars(self), all_hold=self.all_hold)


def lagrangian_check(boundary: CochainComplex, pairing: ShiftedPairing,
                     lagrangian: Union[Sequence[int], RationalMatrix],
                     complement: Optional[Sequence[int]] = None) -> LagrangianCheck:
    """
    Check that L is half-rank, isotropic and Q-closed.

    L is either a set of basis indices or a matrix whose columns span it. no_l_to_complement reads the
    component of Q L along L⊥ through the pairing, as <L, Q L> = 0. For index sets the verdict on whether
    the complement (by default the remaining indices) is itself isotropic is reported too.
    """
    n = boundary.dim
    q, gram = boundary.differential, pairing.gram
    if isinstance(lagrangian, RationalMatrix):
        basis = lagrangian
        dim_l = rank(basis)
        return LagrangianCheck(
            half_rank=2 * dim_l == n,
            isotropic=(basis.transpose() @ gram @ basis).is_zero(),
            closed=rank(RationalMatrix.hstack([basis, q @ basis])) == dim_l,
            no_l_to_complement=(basis.transpose() @ gram @ q @ basis).is_zero(),
        )
    chosen = sorted(set(lagrangian))
    outside = sorted(set(range(n)) - set(chosen))
    rest = outside if complement is None else sorted(complement)
    everything = list(range(n))
    return LagrangianCheck(
        half_rank=2 * len(chosen) == n,
        isotropic=gram.submatrix(chosen, chosen).is_zero(),
        closed=q.submatrix(outside, chosen).is_zero(),
        no_l_to_complement=(gram.submatrix(chosen, everything) @ q.submatrix(everything, chosen)).is_zero(),
        complement_isotropic=gram.submatrix(rest, rest).is_zero(),
    )


class BulkBoundaryModel:
    """
    Boundary data (E_∂, <,>_∂, L) of a theory topological normal to the boundary.

    far_lagrangian is an optional second condition imposed at the far end t = N of the interval. L and
    its complement are coordinate subspaces, so Q_∂ splits into Q_L, Q_L⊥ and Q_rel: L⊥ -> L.

    Raises:
        ModelError: if a condition fails the Lagrangian check or Q_∂ does not preserve the pairing
    """

    def __init__(self, boundary: CochainComplex, pairing: ShiftedPairing, lagrangian: Sequence[int],
                 far_lagrangian: Optional[Sequence[int]] = None, name: str = '', check: bool = True):
        self.boundary = boundary
        self.pairing = pairing
        self.lagrangian = sorted(lagrangian)
        self.far_lagrangian = None if far_lagrangian is None else sorted(far_lagrangian)
        self.name = name or boundary.name
        if pairing.space != boundary.space:
            raise ModelError(f"Boundary pairing of {self.name} lives on another space")
        if check:
            if not is_invariant(boundary, pairing):
                raise ModelError(f"Q_∂ of {self.name} is not a derivation for the boundary pairing")
            for label, chosen in (('L', self.lagrangian), ('far L', self.far_lagrangian)):
                if chosen is None:
                    continue
                verdict = lagrangian_check(boundary, pairing, chosen)
                if not verdict.all_hold:
                    failed = [k for k, v in vars(verdict).items() if v is False]
                    raise ModelError(f"{label} of {self.name} is not a Lagrangian subcomplex: {failed}")

    @property
    def dim(self) -> int:
        return self.boundary.dim

    def complement(self, lagrangian: Optional[Sequence[int]] = None) -> List[int]:
        chosen = set(self.lagrangian if lagrangian is None else lagrangian)
        return [x for x in range(self.dim) if x not in chosen]

    def decomposition(self, lagrangian: Optional[Sequence[int]] = None) -> Dict[str, RationalMatrix]:
        """Q_L, Q_L⊥ and Q_rel as n x n matrices supported on their blocks."""
        chosen = set(self.lagrangian if lagrangian is None else lagrangian)
        blocks: Dict[str, List] = {'Q_L': [], 'Q_perp': [], 'Q_rel': [], 'Q_L_to_perp': []}
        for i, j, v in self.boundary.differential.entries():
            key = {(True, True): 'Q_L', (False, False): 'Q_perp', (True, False): 'Q_rel',
                   (False, True): 'Q_L_to_perp'}[(i in chosen, j in chosen)]
            blocks[key].append((i, j, v))
        return {k: RationalMatrix.from_entries(self.dim, self.dim, v) for k, v in blocks.items()}

    def __repr__(self) -> str:
        return f"BulkBoundaryModel({self.name}, dim={self.dim}, L={len(self.lagrangian)})"


# --- bulk fields ---

@dataclass
class FieldComplex:
    """Bulk fields on a region: basis elements are (cell, boundary index) pairs."""
    interval: CellularInterval
    complex: CochainComplex
    pairing: ShiftedPairing
    basis: List[Tuple[Cell, int]]
    position: Dict[Tuple[Cell, int], int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.position:
            self.position = {key: n for n, key in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def element(self, cochain: Dict[Cell, Fraction], boundary_vector: Vector) -> Vector:
        """Flat coordinates of (cellular cochain) ⊗ (boundary vector); raises if a term is not a field."""
        result: Vector = {}
        for cell, a in cochain.items():
            for x, b in boundary_vector.items():
                if not (a and b):
                    continue
                key = (cell, x)
                if key not in self.position:
                    raise ModelError(f"{cell}⊗{x} is not a field on {self.interval.describe()}")
                result[self.position[key]] = result.get(self.position[key], 0) + a * b
        return {k: v for k, v in result.items() if v}


def bulk_fields(model: BulkBoundaryModel, interval: CellularInterval) -> FieldComplex:
    """Unconditioned fields C(region) ⊗ E_∂ with the pairing W ⊗ <,>_∂ of degree p_∂ - 1."""
    cell_complex = interval.complex()
    cells = interval.basis
    pairs = tensor_basis(cell_complex.space, model.boundary.space)
    complex_ = tensor(cell_complex, model.boundary)
    complex_.name = f"E({interval.describe()})"
    pairing = tensor_pairing(interval.whitney_pairing(), model.pairing)
    return FieldComplex(interval, complex_, pairing, [(cells[a], x) for a, x in pairs])


def conditioned_fields(model: BulkBoundaryModel, interval: CellularInterval) -> FieldComplex:
    """
    Fields whose value at a boundary vertex lies in the Lagrangian: v_0 ⊗ L⊥ is dropped when v_0 is
    retained, and v_N ⊗ L_far⊥ when v_N is retained and a far condition is given.
    """
    full = bulk_fields(model, interval)
    near = set(model.complement())
    far = set(model.complement(model.far_lagrangian)) if model.far_lagrangian is not None else set()
    n_cells = interval.cells
    keep = []
    for n, (cell, x) in enumerate(full.basis):
        if cell == ('v', 0) and x in near:
            continue
        if cell == ('v', n_cells) and x in far:
            continue
        keep.append(n)
    name = f"E_L({interval.describe()})"
    complex_ = full.complex.restrict(keep, name=name)
    pairing = ShiftedPairing(complex_.space, full.pairing.gram.submatrix(keep, keep), full.pairing.degree,
                             full.pairing.symmetry, name=f"<,>_{interval.describe()}", check=False)
    logger.debug(f"Conditioned fields on {interval.describe()}: {len(keep)} of {full.dim} basis elements")
    return FieldComplex(interval, complex_, pairing, [full.basis[n] for n in keep])


def restriction(model: BulkBoundaryModel, fields: FieldComplex) -> ChainMap:
    """rho(v_0 ⊗ x) = x; zero on every other basis element."""
    entries = [(x, n, Fraction(1)) for n, (cell, x) in enumerate(fields.basis) if cell == ('v', 0)]
    matrix = RationalMatrix.from_entries(model.dim, fields.dim, entries)
    return ChainMap(fields.complex, model.boundary, matrix, name='rho')


def green_defect(fields: FieldComplex) -> ShiftedPairing:
    return pairing_invariance_defect(fields.complex, fields.pairing)


def telescoping_form(model: BulkBoundaryModel, fields: FieldComplex) -> RationalMatrix:
    """(f g)(stop) - (f g)(start) times <,>_∂ on retained endpoint vertices of the region."""
    region = fields.interval.region
    entries = []
    for vertex, sign in ((region.start, -1), (region.stop, 1)):
        for x, y, value in model.pairing.gram.entries():
            a, b = fields.position.get((('v', vertex), x)), fields.position.get((('v', vertex), y))
            if a is not None and b is not None:
                entries.append((a, b, sign * value))
    return RationalMatrix.from_entries(fields.dim, fields.dim, entries)


def extension_by_zero(source: FieldComplex, target: FieldComplex) -> RationalMatrix:
    """
    Basis inclusion of compactly supported fields.

    Raises:
        ModelError: if a source field is not a field of the target region
    """
    entries = []
    for n, key in enumerate(source.basis):
        if key not in target.position:
            raise ModelError(f"{key[0]}⊗{key[1]} on {source.interval.describe()} does not extend to "
                             f"{target.interval.describe()}")
        entries.append((target.position[key], n, Fraction(1)))
    return RationalMatrix.from_entries(target.dim, source.dim, entries)


# --- correspondence maps ---

@dataclass
class Correspondence:
    """(I, P, K) between conditioned fields and S = L⊥[-1], with the cochains used to build them."""
    fields: FieldComplex
    retraction: DeformationRetraction
    lagrangian: List[int]
    complement: List[int]
    phi: Dict[int, Fraction]
    psi: Dict[int, Fraction]
    whitney_value: Fraction
    closed_end: str

    @property
    def inclusion(self) -> RationalMatrix:
        return self.retraction.inclusion

    @property
    def small(self) -> CochainComplex:
        return self.retraction.small


def _small_complex(model: BulkBoundaryModel, complement: List[int]) -> CochainComplex:
    space = model.boundary.space
    labels = space.flat_labels()
    quotient = CochainComplex(
        GradedVectorSpace.from_degree_list([space.degree_of(x) for x in complement],
                                           [f"s{labels[x]}" for x in complement]),
        model.boundary.differential.submatrix(complement, complement), name='L⊥', check=False)
    small = shift(quotient, -1)
    small.name = 'L⊥[-1]'
    return small


def correspondence_maps(model: BulkBoundaryModel, interval: CellularInterval,
                        phi: Sequence) -> Correspondence:
    """
    The deformation retraction of conditioned fields onto L⊥[-1].

    With Φ(i) = sum of phi over edges left of v_i:
      I(s x) = phi ⊗ x + Ψ ⊗ Q_rel x,   P(e_j ⊗ x) = s proj_L⊥ x,   P(vertices) = 0,
      K(e_j ⊗ x) = J(e_j) ⊗ x + Ψ ⊗ proj_L⊥ x,   K(vertices) = 0.
    For a region closed at t = 0 (or open at both ends, with L empty) Ψ = Φ - 1 and J(e_j) = sum_{i <= j} v_i;
    for a region closed at the far end Ψ = Φ and J(e_j) = -sum_{i > j} v_i.

    Raises:
        ModelError: for full support, closed-closed regions, a missing far condition or a phi whose
            total weight is not one
    """
    region = interval.region
    if interval.support != 'compact':
        raise ModelError("Correspondence maps need compactly supported fields")
    if region.kind == 'cc':
        raise ModelError("Regions closed at both ends have no boundary reduction; use acyclic_contraction")
    weights = [Fraction(w) for w in phi]
    if len(weights) != len(interval.edges):
        raise ModelError(f"phi has {len(weights)} weights for {len(interval.edges)} edges")
    if sum(weights) != 1:
        raise ModelError(f"phi must have total weight 1, got {sum(weights)}")
    if region.kind == 'oc':
        if model.far_lagrangian is None:
            raise ModelError(f"{model.name} has no far boundary condition")
        lagrangian, closed_end = model.far_lagrangian, 'right'
    elif region.kind == 'co':
        lagrangian, closed_end = model.lagrangian, 'left'
    else:
        lagrangian, closed_end = [], 'none'
    complement = model.complement(lagrangian)
    fields = conditioned_fields(model, interval)
    small = _small_complex(model, complement)
    small_index = {x: c for c, x in enumerate(complement)}
    q_rel = model.boundary.differential.submatrix(lagrangian, complement)

    phi_by_edge = dict(zip(interval.edges, weights))
    cumulative: Dict[int, Fraction] = {}
    running = Fraction(0)
    for i in range(region.start, region.stop + 1):
        cumulative[i] = running
        running += phi_by_edge.get(i, Fraction(0))
    offset = 0 if closed_end == 'right' else 1
    psi = {i: cumulative[i] - offset for i in interval.vertices}

    def homotopy_cochain(j: int) -> Dict[int, Fraction]:
        if closed_end == 'right':
            return {i: Fraction(-1) for i in interval.vertices if i > j}
        return {i: Fraction(1) for i in interval.vertices if i <= j}

    inclusion_entries, projection_entries, homotopy_entries = [], [], []
    for c, x in enumerate(complement):
        for j, w in phi_by_edge.items():
            if w:
                inclusion_entries.append((fields.position[(('e', j), x)], c, w))
        for r, value in q_rel.column(c).items():
            for i, p in psi.items():
                if p:
                    inclusion_entries.append((fields.position[(('v', i), lagrangian[r])], c, p * value))
    for n, (cell, x) in enumerate(fields.basis):
        if cell[0] != 'e':
            continue
        if x in small_index:
            projection_entries.append((small_index[x], n, Fraction(1)))
        column: Dict[int, Fraction] = dict(homotopy_cochain(cell[1]))
        if x in small_index:
            for i, p in psi.items():
                column[i] = column.get(i, 0) + p
        for i, value in column.items():
            if not value:
                continue
            key = (('v', i), x)
            if key not in fields.position:
                raise ModelError(f"Homotopy leaves the conditioned fields at v{i}")
            homotopy_entries.append((fields.position[key], n, value))
    n = fields.dim
    retraction = DeformationRetraction(
        fields.complex, small,
        RationalMatrix.from_entries(n, small.dim, inclusion_entries),
        RationalMatrix.from_entries(small.dim, n, projection_entries),
        RationalMatrix.from_entries(n, n, homotopy_entries),
        name=f"IPK({interval.describe()})",
    )
    half = Fraction(1, 2)
    whitney_value = sum((w * half * psi.get(i, Fraction(0))
                         for j, w in phi_by_edge.items() for i in (j, j + 1)), Fraction(0))
    logger.debug(f"Correspondence on {interval.describe()}: {n} fields -> {small.dim}, W(phi, Psi) = {whitney_value}")
    return Correspondence(fields, retraction, list(lagrangian), complement, phi_by_edge, psi,
                          whitney_value, closed_end)


@dataclass
class CocycleCheck:
    holds: bool
    whitney_value: Fraction
    mu: ShiftedPairing
    pulled_back: ShiftedPairing
    defect: RationalMatrix


def boundary_cocycle(model: BulkBoundaryModel, correspondence: Correspondence) -> ShiftedPairing:
    """mu(s x1, s x2) = <x1, Q_rel x2>_∂ on L⊥[-1], of degree p_∂ - 1."""
    lagrangian, complement = correspondence.lagrangian, correspondence.complement
    gram = model.pairing.gram.submatrix(complement, lagrangian) @ \
        model.boundary.differential.submatrix(lagrangian, complement)
    return ShiftedPairing(correspondence.small.space, gram, model.pairing.degree - 1, model.pairing.symmetry,
                          name='mu', check=False)


def quantum_cocycle_check(model: BulkBoundaryModel, correspondence: Correspondence) -> CocycleCheck:
    """
    Compare <I a, I b> with 2 W(phi, Ψ) mu(a, b), where W(phi, Ψ) is the cellular value of the integral
    of phi (Ψ); the value is -1/2 for regions closed at t = 0 and +1/2 at the far end.
    """
    mu = boundary_cocycle(model, correspondence)
    inclusion = correspondence.inclusion
    pulled = ShiftedPairing(correspondence.small.space,
                            inclusion.transpose() @ correspondence.fields.pairing.gram @ inclusion,
                            mu.degree, mu.symmetry, name='I*<,>', check=False)
    defect = pulled.gram - mu.gram.scale(2 * correspondence.whitney_value)
    holds = defect.is_zero()
    logger.info(f"Quantum cocycle check on {correspondence.fields.interval.describe()}: "
                f"W(phi, Psi) = {correspondence.whitney_value}, holds = {holds}")
    return CocycleCheck(holds, correspondence.whitney_value, mu, pulled, defect)


# --- observables and structure maps ---

def generator_data(fields: FieldComplex) -> Tuple[CochainComplex, ShiftedPairing]:
    """The generator complex E[1] and its degree +1 symmetric pairing."""
    return shift(fields.complex, 1), shift_pairing(fields.pairing, 1)


def observables(fields: FieldComplex, sym_cut: int, hbar_cut: int = 0, quantum: bool = True) -> SymComplex:
    generators, pairing = generator_data(fields)
    return SymComplex(generators, pairing if quantum else None, sym_cut, hbar_cut,
                      name=f"Obs({fields.interval.describe()})")


@dataclass
class QuantumInclusion:
    source: SymComplex
    target: SymComplex
    chain_map: ChainMap

    def apply(self, element: SymElement) -> SymElement:
        return self.target.element(self.chain_map.matrix.apply(self.source.vector(element)))


def quantum_inclusion(model: BulkBoundaryModel, correspondence: Correspondence, sym_cut: int,
                      hbar_cut: int) -> QuantumInclusion:
    """
    Sym(I) from the twisted envelope of L⊥ (cocycle 2 W(phi, Ψ) mu) to the quantum observables.

    Raises:
        NotAComplexError: if Sym(I) does not intertwine the two quantum differentials
    """
    mu = boundary_cocycle(model, correspondence).scale(2 * correspondence.whitney_value)
    twist = shift_pairing(mu, 1)
    source = twisted_envelope(shift(correspondence.small, 1), twist, sym_cut, hbar_cut, name='U_mu(L⊥)')
    target = observables(correspondence.fields, sym_cut, hbar_cut)
    return QuantumInclusion(source, target, sym_map(correspondence.inclusion, source, target, name='Sym(I)'))


@dataclass
class StructureMap:
    sources: List[FieldComplex]
    target: FieldComplex
    source_observables: SymComplex
    target_observables: SymComplex
    chain_map: ChainMap
    positions: List[List[int]]

    def generator(self, source: int, cochain: Dict[Cell, Fraction], boundary_vector: Vector) -> Vector:
        """Generator-space coordinates of a field on the given source, inside the direct sum."""
        local = self.sources[source].element(cochain, boundary_vector)
        return {self.positions[source][g]: v for g, v in local.items()}

    def product(self, factors: Sequence[Vector], hbar_power: int = 0) -> SymElement:
        """The ordered product of linear elements in Sym of the sources."""
        expanded = self.source_observables.algebra.expand_product(list(factors))
        return SymElement({(mono, hbar_power): v for mono, v in expanded.items()})

    def apply(self, element: SymElement) -> SymElement:
        vector = self.chain_map.matrix.apply(self.source_observables.vector(element))
        return self.target_observables.element(vector)


def structure_map(model: BulkBoundaryModel, sources: Sequence[CellularInterval], target: CellularInterval,
                  sym_cut: int, hbar_cut: int = 0, quantum: bool = True) -> StructureMap:
    """
    Extension by zero followed by multiplication, Sym(E_c(U_1)[1] ⊕ ...) -> Sym(E_c(V)[1]).

    Raises:
        ModelError: if sources overlap or a source is not contained in the target
    """
    for a in range(len(sources)):
        for b in range(a + 1, len(sources)):
            if set(sources[a].edges) & set(sources[b].edges):
                raise ModelError(f"Regions {sources[a].describe()} and {sources[b].describe()} overlap")
    source_fields = [conditioned_fields(model, s) for s in sources]
    target_fields = conditioned_fields(model, target)
    generator_parts = [generator_data(f) for f in source_fields]
    positions = direct_sum_positions([g.space for g, _ in generator_parts])
    source_generators = direct_sum(*[g for g, _ in generator_parts])
    source_pairing = direct_sum_pairing(*[p for _, p in generator_parts])
    entries = []
    for part, pos in zip(source_fields, positions):
        for i, j, v in extension_by_zero(part, target_fields).entries():
            entries.append((i, pos[j], v))
    linear = RationalMatrix.from_entries(target_fields.dim, source_generators.dim, entries)
    source_obs = SymComplex(source_generators, source_pairing if quantum else None, sym_cut, hbar_cut,
                            name='Obs(⊔U)')
    target_obs = observables(target_fields, sym_cut, hbar_cut, quantum)
    chain_map = sym_map(linear, source_obs, target_obs,
                        name=f"m({', '.join(s.describe() for s in sources)} -> {target.describe()})")
    return StructureMap(source_fields, target_fields, source_obs, target_obs, chain_map, positions)


# --- Mayer-Vietoris ---

@dataclass
class CosheafSequence:
    dims: Dict[int, Tuple[int, int, int, int]]
    exact: Dict[int, bool]

    @property
    def all_exact(self) -> bool:
        return all(self.exact.values())


def cosheaf_sequence(model: BulkBoundaryModel, first: CellularInterval,
                     second: CellularInterval) -> CosheafSequence:
    """
    0 -> E(U1 ∩ U2) -> E(U1) ⊕ E(U2) -> E(U1 ∪ U2) -> 0 with maps (ext, -ext) and ext + ext, checked
    for exactness degree by degree.

    Raises:
        ModelError: unless first starts before second and the two overlap
    """
    r1, r2 = first.region, second.region
    if not (r1.start <= r2.start < r1.stop <= r2.stop):
        raise ModelError(f"Regions {first.describe()} and {second.describe()} do not overlap left to right")
    cells = first.cells
    meet = CellularInterval(cells, Region(r2.start, r1.stop, r2.kind[0] + r1.kind[1]), first.support)
    union = CellularInterval(cells, Region(r1.start, r2.stop, r1.kind[0] + r2.kind[1]), first.support)
    f_meet, f1, f2, f_union = (conditioned_fields(model, u) for u in (meet, first, second, union))
    into = RationalMatrix.vstack([extension_by_zero(f_meet, f1), -extension_by_zero(f_meet, f2)])
    out = RationalMatrix.hstack([extension_by_zero(f1, f_union), extension_by_zero(f2, f_union)])
    middle_degrees = f1.complex.space.degree_list + f2.complex.space.degree_list
    dims, exact = {}, {}
    degrees = sorted(set(f_meet.complex.space.dims) | set(middle_degrees) | set(f_union.complex.space.dims))
    composite_zero = (out @ into).is_zero()
    for k in degrees:
        rows_mid = [n for n, d in enumerate(middle_degrees) if d == k]
        a = into.submatrix(rows_mid, f_meet.complex.space.indices(k))
        b = out.submatrix(f_union.complex.space.indices(k), rows_mid)
        dim_meet, dim_mid, dim_union = f_meet.complex.space.dim(k), len(rows_mid), f_union.complex.space.dim(k)
        rank_a, rank_b = rank(a), rank(b)
        dims[k] = (dim_meet, dim_mid, dim_union, rank_a + rank_b)
        exact[k] = composite_zero and rank_a == dim_meet and rank_b == dim_union and rank_a + rank_b == dim_mid
    return CosheafSequence(dims, exact)


# --- model builders ---

def topological_mechanics_model(n: int) -> BulkBoundaryModel:
    """V = span(q_i, p_i) in degree 0 with omega(q_i, p_i) = 1 and L = span(q_i)."""
    labels = [f"q{i}" for i in range(n)] + [f"p{i}" for i in range(n)]
    space = GradedVectorSpace({0: 2 * n}, {0: labels})
    entries = []
    for i in range(n):
        entries.append((i, n + i, Fraction(1)))
        entries.append((n + i, i, Fraction(-1)))
    omega = ShiftedPairing(space, RationalMatrix.from_entries(2 * n, 2 * n, entries), 0, -1, name='omega')
    return BulkBoundaryModel(CochainComplex(space, name='V'), omega, list(range(n)), name=f"TM(dim V={2 * n})")


def koszul_strip_model(n: int) -> BulkBoundaryModel:
    """
    E_∂ = V∨ ⊕ V[-1] with zero differential and pairing; L = V[-1] at t = 0 and the far condition V∨.
    """
    labels = {0: [f"nu{i}" for i in range(n)], 1: [f"v{i}" for i in range(n)]}
    space = GradedVectorSpace({0: n, 1: n}, labels)
    boundary = CochainComplex(space, name='V∨⊕V[-1]')
    return BulkBoundaryModel(boundary, ShiftedPairing.zero(space, 0, -1), list(range(n, 2 * n)),
                             far_lagrangian=list(range(n)), name=f"strip(dim V={n})")


def poisson_boundary_differential(pi: RationalMatrix, space: GradedVectorSpace,
                                  source: Sequence[int], target: Sequence[int], sign: int = 1) -> RationalMatrix:
    """x_j -> sign * sum_i Pi_ij y_i from the source block to the target block."""
    n = space.total_dim
    entries = [(target[i], source[j], sign * v) for i, j, v in pi.entries()]
    return RationalMatrix.from_entries(n, n, entries)


def boundary_perturbation(fields: FieldComplex, q: RationalMatrix) -> RationalMatrix:
    """delta(a ⊗ x) = (-1)^{|a|} a ⊗ q x, truncated to the basis of the given fields."""
    entries = []
    columns = q.columns()
    for n, (cell, x) in enumerate(fields.basis):
        sign = -1 if cell[0] == 'e' else 1
        for y, value in columns[x].items():
            target = fields.position.get((cell, y))
            if target is not None:
                entries.append((target, n, sign * value))
    return RationalMatrix.from_entries(fields.dim, fields.dim, entries)


def psm_half_space_model(pi: RationalMatrix) -> BulkBoundaryModel:
    """
    Circle-reduced Poisson sigma model: a ∈ V∨[1], v ∈ V, c ∈ V∨, e ∈ V[-1] with <v, c> = 1,
    <e, a> = 1, Q a_j = sum_i Pi_ij v_i, Q c_j = -sum_i Pi_ij e_i and L = V ⊕ V[-1].
    """
    n = pi.rows
    a, v, c, e = (list(range(k * n, (k + 1) * n)) for k in range(4))
    labels = {-1: [f"a{i}" for i in range(n)], 0: [f"v{i}" for i in range(n)] + [f"c{i}" for i in range(n)],
              1: [f"e{i}" for i in range(n)]}
    space = GradedVectorSpace({-1: n, 0: 2 * n, 1: n}, labels)
    q = poisson_boundary_differential(pi, space, a, v) + poisson_boundary_differential(pi, space, c, e, -1)
    entries = []
    for i in range(n):
        entries += [(v[i], c[i], Fraction(1)), (c[i], v[i], Fraction(-1)),
                    (e[i], a[i], Fraction(1)), (a[i], e[i], Fraction(1))]
    pairing = ShiftedPairing(space, RationalMatrix.from_entries(4 * n, 4 * n, entries), 0, -1, name='<,>_PSM')
    return BulkBoundaryModel(CochainComplex(space, q, name='PSM_∂'), pairing, v + e, name=f"PSM(dim V={n})")


# --- spectral surfaces ---

@dataclass
class SpectralSurface:
    """
    Fourier modes -m..m of a flat surface. Mode k has dbar-eigenvalue λ_k, d-eigenvalue μ_k and volume
    weight w_k. dbar and d give λ_k and μ_k for k > 0 (default k and 2k) and extend oddly to k < 0; weights
    gives w_k for k >= 0 (default weight) and extends evenly, so the surface pairing stays invariant.

    Raises:
        ModelError: for negative pairs, keys outside the modes, or a zero eigenvalue or weight
    """
    pairs: int = 1
    weight: Fraction = Fraction(1)
    dbar: Optional[Dict[int, Fraction]] = None
    d: Optional[Dict[int, Fraction]] = None
    weights: Optional[Dict[int, Fraction]] = None

    def __post_init__(self):
        if self.pairs < 0:
            raise ModelError(f"pairs must be non-negative, got {self.pairs}")
        for label, values, low in (('dbar', self.dbar, 1), ('d', self.d, 1), ('weights', self.weights, 0)):
            for k, value in (values or {}).items():
                if not low <= k <= self.pairs:
                    raise ModelError(f"{label} is given on mode {k}, expected {low}..{self.pairs}")
                if not Fraction(value):
                    raise ModelError(f"{label} vanishes on mode {k}")
        if not Fraction(self.weight):
            raise ModelError("The volume weight must be nonzero")

    @property
    def modes(self) -> List[int]:
        return list(range(-self.pairs, self.pairs + 1))

    @staticmethod
    def _odd(values: Optional[Dict[int, Fraction]], k: int, slope: int) -> Fraction:
        if k == 0:
            return Fraction(0)
        value = Fraction((values or {}).get(abs(k), slope * abs(k)))
        return value if k > 0 else -value

    def dbar_eigenvalue(self, k: int) -> Fraction:
        return self._odd(self.dbar, k, 1)

    def d_eigenvalue(self, k: int) -> Fraction:
        return self._odd(self.d, k, 2)

    def mode_weight(self, k: int) -> Fraction:
        return Fraction((self.weights or {}).get(abs(k), self.weight))


DOLBEAULT_TYPES = ('00', '01', '10', '11')


def _dolbeault_index(surface: SpectralSurface) -> Dict[Tuple[str, int], int]:
    m = len(surface.modes)
    order = {'00': 0, '01': m, '10': 2 * m, '11': 3 * m}
    return {(t, k): order[t] + n for t in DOLBEAULT_TYPES for n, k in enumerate(surface.modes)}


def dolbeault_complex(surface: SpectralSurface, types: Sequence[str] = DOLBEAULT_TYPES,
                      dbar_only: bool = False) -> Tuple[CochainComplex, Optional[ShiftedPairing]]:
    """
    Omega^{•,•} of the spectral surface with d = dbar + d: dbar e00 = λ e01, d e00 = μ e10,
    dbar e10 = -λ e11, d e01 = μ e11. The pairing e00_k e11_{-k} = w_k, e01_k e10_{-k} = -w_k has degree -2
    and is returned only for the full set of types.
    """
    full_index = _dolbeault_index(surface)
    chosen = [key for key in sorted(full_index, key=full_index.get) if key[0] in types]
    index = {key: n for n, key in enumerate(chosen)}
    n = len(chosen)
    entries = []
    for k in surface.modes:
        lam, mu = surface.dbar_eigenvalue(k), surface.d_eigenvalue(k)
        arrows = [('00', '01', lam), ('10', '11', -lam)]
        if not dbar_only:
            arrows += [('00', '10', mu), ('01', '11', mu)]
        for src, dst, value in arrows:
            if value and (src, k) in index and (dst, k) in index:
                entries.append((index[(dst, k)], index[(src, k)], value))
    degrees = [int(t[0]) + int(t[1]) for t, _ in chosen]
    space = GradedVectorSpace.from_degree_list(degrees, [f"e{t}[{k}]" for t, k in chosen])
    complex_ = CochainComplex(space, RationalMatrix.from_entries(n, n, entries), name='Ω(Σ)')
    if tuple(types) != DOLBEAULT_TYPES:
        return complex_, None
    gram = []
    for k in surface.modes:
        w = surface.mode_weight(k)
        gram += [(index[('00', k)], index[('11', -k)], w), (index[('11', -k)], index[('00', k)], w),
                 (index[('01', k)], index[('10', -k)], -w), (index[('10', -k)], index[('01', k)], w)]
    pairing = ShiftedPairing(space, RationalMatrix.from_entries(n, n, gram), -2, 1, name='∫Σ')
    return complex_, pairing


def spectral_dolbeault(surface: SpectralSurface, kappa=1) -> BulkBoundaryModel:
    """
    Chern-Simons boundary data E_∂ = Ω(Σ)[1] with kappa times the shifted pairing, L = Ω^{1,•} and the
    conjugate condition Ω^{•,1} at the far end. Q_rel is then the holomorphic d.
    """
    complex_, pairing = dolbeault_complex(surface)
    boundary = shift(complex_, 1)
    boundary.name = 'Ω(Σ)[1]'
    index = _dolbeault_index(surface)
    near = sorted(index[(t, k)] for t in ('10', '11') for k in surface.modes)
    far = sorted(index[(t, k)] for t in ('01', '11') for k in surface.modes)
    return BulkBoundaryModel(boundary, shift_pairing(pairing, 1).scale(Fraction(kappa)), near, far,
                             name=f"CS(modes={len(surface.modes)}, κ={kappa})")


def scalar_complex(surface: SpectralSurface) -> Tuple[CochainComplex, ShiftedPairing]:
    """Ω^0 -> Ω^0 via d dbar in degrees 0 and 1, with the degree -1 pairing <a_k, b_{-k}> = w_k."""
    modes = surface.modes
    m = len(modes)
    position = {k: n for n, k in enumerate(modes)}
    entries = [(m + n, n, surface.dbar_eigenvalue(k) * surface.d_eigenvalue(k))
               for n, k in enumerate(modes) if k]
    space = GradedVectorSpace({0: m, 1: m}, {0: [f"a[{k}]" for k in modes], 1: [f"b[{k}]" for k in modes]})
    complex_ = CochainComplex(space, RationalMatrix.from_entries(2 * m, 2 * m, entries), name='scalar')
    gram = []
    for k in modes:
        w = surface.mode_weight(k)
        gram += [(position[k], m + position[-k], w), (m + position[-k], position[k], -w)]
    pairing = ShiftedPairing(space, RationalMatrix.from_entries(2 * m, 2 * m, gram), -1, -1, name='<,>_scalar')
    return complex_, pairing


def slab_model(surface: SpectralSurface, cells: int, kappa=1) -> FieldComplex:
    """Conditioned fields on [0, N] x Σ: Ω^{1,•} at t = 0 and Ω^{•,1} at t = N."""
    model = spectral_dolbeault(surface, kappa)
    return conditioned_fields(model, CellularInterval(cells, Region(0, cells, 'cc')))


# --- Riemannian boundary condition ---

@dataclass
class RiemannianCondition:
    check: LagrangianCheck
    lagrangian: RationalMatrix
    d_minus: RationalMatrix


def riemannian_condition_model(complex_: CochainComplex, pairing: ShiftedPairing, middle: int,
                               plus: Sequence[Vector], minus: Sequence[Vector]) -> RiemannianCondition:
    """
    L = Ω^mid_+ ⊕ Ω^{> mid}, given the ± eigenbases of the middle degree in flat coordinates.

    d_minus is d from degree mid - 1 followed by the projection onto the - part, as a map into Ω^mid.
    """
    space = complex_.space
    n = space.total_dim
    upper = [i for i in range(n) if space.degree_of(i) > middle]
    columns = list(plus) + [{i: Fraction(1)} for i in upper]
    lagrangian = RationalMatrix.from_columns(n, columns)
    check = lagrangian_check(complex_, pairing, lagrangian)
    mid = space.indices(middle)
    local = {g: c for c, g in enumerate(mid)}

    def localize(v: Vector) -> Vector:
        return {local[g]: x for g, x in v.items()}

    basis = RationalMatrix.from_columns(len(mid), [localize(v) for v in list(plus) + list(minus)])
    if basis.rows != basis.cols:
        raise ModelError("The ± parts do not split the middle degree")
    coordinates = inverse(basis)
    minus_part = RationalMatrix.from_columns(len(mid), [localize(v) for v in minus])
    projector = minus_part @ coordinates.submatrix(list(range(len(plus), len(mid))), list(range(len(mid))))
    d_minus = projector @ complex_.block(middle - 1)
    return RiemannianCondition(check, lagrangian, d_minus)


def riemannian_toy() -> Tuple[CochainComplex, ShiftedPairing, List[Vector], List[Vector]]:
    """Ω(N) with dims (1, 2, 1), d0 = (1, 0)^T, d1 = (0, -1) and ± parts spanned by e1 ± e2."""
    complex_ = CochainComplex.from_blocks(
        {0: 1, 1: 2, 2: 1},
        {0: RationalMatrix.from_dense([[1], [0]]), 1: RationalMatrix.from_dense([[0, -1]])},
        labels={0: ['1'], 1: ['e1', 'e2'], 2: ['vol']}, name='Ω(N)')
    gram = RationalMatrix.from_entries(4, 4, [(0, 3, 1), (3, 0, 1), (1, 2, 1), (2, 1, -1)])
    pairing = ShiftedPairing(complex_.space, gram, -2, 1, name='∫N')
    plus = [{1: Fraction(1), 2: Fraction(1)}]
    minus = [{1: Fraction(1), 2: Fraction(-1)}]
    return complex_, pairing, plus, minus


def strip_contraction(model: BulkBoundaryModel, cells: int) -> DeformationRetraction:
    """The contraction of the conditioned strip [0, N] onto zero."""
    fields = conditioned_fields(model, CellularInterval(cells, Region(0, cells, 'cc')))
    return acyclic_contraction(fields.complex, name=f"strip({cells})")
