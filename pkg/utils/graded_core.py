# utils/graded_core.py
"""
Graded linear algebra over the rationals: graded spaces, cochain complexes, chain maps, shifted
pairings, deformation retractions and the homological perturbation lemma.

Every space has a flat basis ordered by degree, and all maps are stored as flat RationalMatrix
objects. Sign conventions: transposing homogeneous elements a, b costs (-1)^{|a||b|}, the shift
C[k]^n = C^{n+k} multiplies d by (-1)^k, and the dual differential is -d^T.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from utils.linear_algebra import (
    IncrementalReducer, RationalMatrix, Vector, format_fraction, inverse, kernel, rank, solve, to_fraction
)

logger = logging.getLogger('BVFactorize.graded_core')


# --- errors ---

class GradedAlgebraError(ValueError):
    """Base class for every library error raised by the verification engine."""


class NotAComplexError(GradedAlgebraError):
    """A differential does not square to zero or a map is not a chain map."""


class DegreeError(GradedAlgebraError):
    """A map or pairing is not homogeneous of its declared degree."""


class TruncationError(GradedAlgebraError):
    """An operation would leave the range allowed by the truncation cutoffs."""


class PerturbationError(GradedAlgebraError):
    """A perturbation is not square-zero or the perturbation series does not terminate."""


class ModelError(GradedAlgebraError):
    """Invalid geometric or algebraic model data."""


# --- graded spaces ---

class GradedVectorSpace:
    """A finite-dimensional integer-graded rational vector space with a labelled flat basis."""

    def __init__(self, dims: Dict[int, int], labels: Optional[Dict[int, Sequence[str]]] = None,
                 prefix: str = 'e'):
        clean = {}
        for degree, dim in dims.items():
            if dim < 0:
                raise DegreeError(f"Negative dimension {dim} in degree {degree}")
            if dim:
                clean[int(degree)] = int(dim)
        self.dims: Dict[int, int] = dict(sorted(clean.items()))
        self.labels: Dict[int, Tuple[str, ...]] = {}
        for degree, dim in self.dims.items():
            given = (labels or {}).get(degree)
            if given is not None:
                if len(given) != dim:
                    raise DegreeError(f"Degree {degree} has {dim} basis vectors but {len(given)} labels")
                self.labels[degree] = tuple(given)
            else:
                self.labels[degree] = tuple(f"{prefix}{degree}_{i}" for i in range(dim))
        self._offsets: Dict[int, int] = {}
        self._degree_list: List[int] = []
        offset = 0
        for degree, dim in self.dims.items():
            self._offsets[degree] = offset
            self._degree_list.extend([degree] * dim)
            offset += dim

    @classmethod
    def from_degree_list(cls, degrees: Sequence[int], labels: Optional[Sequence[str]] = None,
                         prefix: str = 'e') -> 'GradedVectorSpace':
        """Build a space from a degree-sorted list of basis degrees."""
        if list(degrees) != sorted(degrees):
            raise DegreeError("Basis degrees must be listed in nondecreasing order")
        dims: Dict[int, int] = {}
        grouped: Dict[int, List[str]] = {}
        for position, degree in enumerate(degrees):
            dims[degree] = dims.get(degree, 0) + 1
            if labels is not None:
                grouped.setdefault(degree, []).append(labels[position])
        return cls(dims, grouped if labels is not None else None, prefix=prefix)

    @property
    def total_dim(self) -> int:
        return len(self._degree_list)

    def degrees(self) -> List[int]:
        return list(self.dims)

    def dim(self, degree: int) -> int:
        return self.dims.get(degree, 0)

    def offset(self, degree: int) -> int:
        return self._offsets.get(degree, sum(d for k, d in self.dims.items() if k < degree))

    def indices(self, degree: int) -> List[int]:
        start = self.offset(degree)
        return list(range(start, start + self.dim(degree)))

    def degree_of(self, index: int) -> int:
        return self._degree_list[index]

    @property
    def degree_list(self) -> List[int]:
        return list(self._degree_list)

    def flat_labels(self) -> List[str]:
        return [label for degree in self.dims for label in self.labels[degree]]

    def is_zero(self) -> bool:
        return not self.dims

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedVectorSpace):
            return NotImplemented
        return self.dims == other.dims

    def __repr__(self) -> str:
        return f"GradedVectorSpace({self.dims})"


def _check_homogeneous(matrix: RationalMatrix, source: GradedVectorSpace,
                       target: GradedVectorSpace, degree: int, what: str):
    if matrix.shape != (target.total_dim, source.total_dim):
        raise DegreeError(f"{what}: matrix shape {matrix.shape} does not match "
                          f"{target.total_dim}x{source.total_dim}")
    for i, j, _ in matrix.entries():
        if target.degree_of(i) != source.degree_of(j) + degree:
            raise DegreeError(f"{what}: entry ({i},{j}) maps degree {source.degree_of(j)} to "
                              f"{target.degree_of(i)}, expected shift {degree}")


# --- complexes ---

class CochainComplex:
    """A graded space with a degree +1 differential stored as one flat matrix."""

    def __init__(self, space: GradedVectorSpace, differential: Optional[RationalMatrix] = None,
                 name: str = '', check: bool = True):
        self.space = space
        n = space.total_dim
        self.differential = differential if differential is not None else RationalMatrix.zeros(n, n)
        self.name = name
        if check:
            _check_homogeneous(self.differential, space, space, 1, f"differential of {name or 'complex'}")
            if not (self.differential @ self.differential).is_zero():
                raise NotAComplexError(f"Differential of {name or 'complex'} does not square to zero")

    @classmethod
    def from_blocks(cls, dims: Dict[int, int], blocks: Dict[int, RationalMatrix],
                    labels: Optional[Dict[int, Sequence[str]]] = None, name: str = '') -> 'CochainComplex':
        """Assemble a complex from per-degree matrices d_k: C^k -> C^{k+1}."""
        space = GradedVectorSpace(dims, labels)
        entries = []
        for degree, block in blocks.items():
            if block.shape != (space.dim(degree + 1), space.dim(degree)):
                raise DegreeError(f"Block d_{degree} has shape {block.shape}, expected "
                                  f"{(space.dim(degree + 1), space.dim(degree))}")
            row0, col0 = space.offset(degree + 1), space.offset(degree)
            entries.extend((row0 + i, col0 + j, v) for i, j, v in block.entries())
        n = space.total_dim
        return cls(space, RationalMatrix.from_entries(n, n, entries), name=name)

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def block(self, degree: int) -> RationalMatrix:
        return self.differential.submatrix(self.space.indices(degree + 1), self.space.indices(degree))

    def is_acyclic(self) -> bool:
        return not any(cohomology_dims(self).values())

    def restrict(self, indices: Sequence[int], name: str = '') -> 'CochainComplex':
        """The subcomplex spanned by a set of basis vectors; raises if it is not closed under d."""
        keep = sorted(indices)
        keep_set = set(keep)
        for i, j, _ in self.differential.entries():
            if j in keep_set and i not in keep_set:
                raise NotAComplexError(f"Basis subset is not closed under d: {j} -> {i}")
        degrees = [self.space.degree_of(i) for i in keep]
        labels = [self.space.flat_labels()[i] for i in keep]
        space = GradedVectorSpace.from_degree_list(degrees, labels)
        return CochainComplex(space, self.differential.submatrix(keep, keep), name=name or self.name,
                              check=False)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'dims': {str(k): v for k, v in self.space.dims.items()},
            'differential': {
                str(k): [[format_fraction(x) for x in row] for row in self.block(k).to_dense()]
                for k in self.space.dims if self.space.dim(k + 1)
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> 'CochainComplex':
        dims = {int(k): int(v) for k, v in payload['dims'].items()}
        blocks = {}
        for key, rows in payload.get('differential', {}).items():
            degree = int(key)
            blocks[degree] = RationalMatrix.from_dense(rows, cols=dims.get(degree, 0)) if rows else \
                RationalMatrix.zeros(dims.get(degree + 1, 0), dims.get(degree, 0))
        return cls.from_blocks(dims, blocks, name=payload.get('name', ''))

    def __repr__(self) -> str:
        return f"CochainComplex({self.name or 'unnamed'}, dims={self.space.dims})"


@dataclass
class CohomologyResult:
    """Graded dimensions and representative cocycles (flat coordinates) of a complex."""
    dims: Dict[int, int]
    representatives: Dict[int, List[Vector]] = field(default_factory=dict)

    def total(self) -> int:
        return sum(self.dims.values())

    def nonzero_degrees(self) -> List[int]:
        return [k for k, v in sorted(self.dims.items()) if v]


def cohomology_dims(complex_: CochainComplex) -> Dict[int, int]:
    """dim H^k = dim C^k - rank d_k - rank d_{k-1}, without computing representatives."""
    ranks = {k: rank(complex_.block(k)) for k in complex_.space.dims}
    result = {}
    for k, dim in complex_.space.dims.items():
        result[k] = dim - ranks.get(k, 0) - ranks.get(k - 1, 0)
    return result


def cohomology(complex_: CochainComplex) -> CohomologyResult:
    """
    Cohomology with deterministic representative cocycles.

    For each degree, the image of d_{k-1} is fed to an echelon reducer first; kernel vectors of d_k
    (lowest free column first) that are new modulo the image become the representatives.
    """
    space = complex_.space
    dims: Dict[int, int] = {}
    reps: Dict[int, List[Vector]] = {}
    for k in space.dims:
        cycles = kernel(complex_.block(k))
        reducer = IncrementalReducer()
        if space.dim(k - 1):
            for column in complex_.block(k - 1).columns():
                reducer.add(column)
        chosen = []
        for z in cycles:
            if reducer.add(z):
                chosen.append(z)
        offset = space.offset(k)
        reps[k] = [{offset + i: v for i, v in z.items()} for z in chosen]
        dims[k] = len(chosen)
    logger.debug(f"Cohomology of {complex_.name or 'complex'}: {dims}")
    return CohomologyResult(dims, reps)


def _local_vector(complex_: CochainComplex, vector: Vector, degree: int) -> Vector:
    space = complex_.space
    offset = space.offset(degree)
    local = {}
    for i, v in vector.items():
        if v and space.degree_of(i) != degree:
            raise DegreeError(f"Vector has a component in degree {space.degree_of(i)}, expected {degree}")
        if v:
            local[i - offset] = v
    return local


def express_modulo_boundaries(complex_: CochainComplex, vector: Vector, candidates: Sequence[Vector],
                              degree: int) -> Optional[List[Fraction]]:
    """
    Find c with vector - sum_i c_i candidates_i exact, all vectors in flat coordinates of one degree.

    Returns:
        The coefficients c (free ones set to zero), or None when no such combination exists
    """
    local = _local_vector(complex_, vector, degree)
    columns = [_local_vector(complex_, c, degree) for c in candidates]
    system = RationalMatrix.hstack([
        RationalMatrix.from_columns(complex_.space.dim(degree), columns),
        complex_.block(degree - 1),
    ])
    solution = solve(system, local)
    if solution is None:
        return None
    return [solution.get(i, Fraction(0)) for i in range(len(columns))]


def cohomology_class(complex_: CochainComplex, result: CohomologyResult, cocycle: Vector,
                     degree: int) -> List[Fraction]:
    """
    Coordinates of a cocycle in the representative basis of result.

    Raises:
        NotAComplexError: if the vector is not a cocycle of the given degree
    """
    if complex_.block(degree).apply(_local_vector(complex_, cocycle, degree)):
        raise NotAComplexError(f"Vector is not a cocycle in degree {degree}")
    coords = express_modulo_boundaries(complex_, cocycle, result.representatives.get(degree, []), degree)
    if coords is None:
        raise GradedAlgebraError("Cocycle is not in the span of representatives and boundaries")
    return coords


def euler_characteristic(dims: Dict[int, int]) -> int:
    return sum((-1) ** (k % 2) * v for k, v in dims.items())


def kunneth(dims1: Dict[int, int], dims2: Dict[int, int]) -> Dict[int, int]:
    result: Dict[int, int] = {}
    for a, x in dims1.items():
        for b, y in dims2.items():
            if x and y:
                result[a + b] = result.get(a + b, 0) + x * y
    return result


# --- chain maps ---

class ChainMap:
    """A homogeneous map f of degree shift with d_target f = (-1)^shift f d_source."""

    def __init__(self, source: CochainComplex, target: CochainComplex, matrix: RationalMatrix,
                 shift: int = 0, name: str = '', check: bool = True):
        self.source = source
        self.target = target
        self.matrix = matrix
        self.shift = shift
        self.name = name
        if check:
            _check_homogeneous(matrix, source.space, target.space, shift, f"map {name or ''}".strip())
            if not self.is_chain_map():
                raise NotAComplexError(f"Map {name or ''} does not commute with the differentials")

    def is_chain_map(self) -> bool:
        lhs = self.target.differential @ self.matrix
        rhs = (self.matrix @ self.source.differential).scale((-1) ** (self.shift % 2))
        return lhs == rhs

    def compose(self, first: 'ChainMap') -> 'ChainMap':
        """self after first."""
        if first.target.space != self.source.space:
            raise DegreeError("Cannot compose maps with mismatched intermediate spaces")
        return ChainMap(first.source, self.target, self.matrix @ first.matrix,
                        shift=self.shift + first.shift, name=f"{self.name}∘{first.name}", check=False)

    @classmethod
    def identity(cls, complex_: CochainComplex) -> 'ChainMap':
        return cls(complex_, complex_, RationalMatrix.identity(complex_.dim), name='id', check=False)


def induced_map_on_cohomology(chain_map: ChainMap, degree: int,
                              source_result: Optional[CohomologyResult] = None,
                              target_result: Optional[CohomologyResult] = None) -> RationalMatrix:
    """Matrix of H^degree(f) in the representative bases."""
    source_result = source_result or cohomology(chain_map.source)
    target_result = target_result or cohomology(chain_map.target)
    columns = []
    for rep in source_result.representatives.get(degree, []):
        image = chain_map.matrix.apply(rep)
        coords = cohomology_class(chain_map.target, target_result, image, degree + chain_map.shift)
        columns.append({i: c for i, c in enumerate(coords) if c})
    return RationalMatrix.from_columns(target_result.dims.get(degree + chain_map.shift, 0), columns)


# --- pairings ---

class ShiftedPairing:
    """
    A bilinear form of cohomological degree p: B(a, b) != 0 only when |a| + |b| + p = 0.

    symmetry is +1 (graded symmetric), -1 (graded antisymmetric) or None for forms without a
    declared symmetry such as invariance defects. The symmetry rule is B(b, a) = eps (-1)^{|a||b|} B(a, b).
    """

    def __init__(self, space: GradedVectorSpace, gram: RationalMatrix, degree: int,
                 symmetry: Optional[int] = None, name: str = '', check: bool = True):
        self.space = space
        self.gram = gram
        self.degree = degree
        self.symmetry = symmetry
        self.name = name
        if check:
            self._validate()

    def _validate(self):
        n = self.space.total_dim
        if self.gram.shape != (n, n):
            raise DegreeError(f"Pairing {self.name}: gram shape {self.gram.shape}, expected {n}x{n}")
        degs = self.space.degree_list
        for a, b, value in self.gram.entries():
            if degs[a] + degs[b] + self.degree != 0:
                raise DegreeError(f"Pairing {self.name}: entry ({a},{b}) pairs degrees {degs[a]}, "
                                  f"{degs[b]} but the pairing has degree {self.degree}")
            if self.symmetry is not None:
                expected = value * self.symmetry * (-1) ** ((degs[a] * degs[b]) % 2)
                if self.gram[b, a] != expected:
                    raise DegreeError(f"Pairing {self.name}: entry ({b},{a}) breaks the declared "
                                      f"symmetry {self.symmetry:+d}")

    @classmethod
    def zero(cls, space: GradedVectorSpace, degree: int, symmetry: Optional[int] = None) -> 'ShiftedPairing':
        n = space.total_dim
        return cls(space, RationalMatrix.zeros(n, n), degree, symmetry, name='0', check=False)

    def evaluate(self, x: Vector, y: Vector) -> Fraction:
        gy = self.gram.apply(y)
        return sum((v * gy[i] for i, v in x.items() if i in gy), Fraction(0))

    def is_zero(self) -> bool:
        return self.gram.is_zero()

    def is_nondegenerate(self) -> bool:
        return rank(self.gram) == self.space.total_dim

    def scale(self, factor) -> 'ShiftedPairing':
        return ShiftedPairing(self.space, self.gram.scale(factor), self.degree, self.symmetry,
                              name=self.name, check=False)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'degree': self.degree,
            'symmetry': self.symmetry,
            'dims': {str(k): v for k, v in self.space.dims.items()},
            'gram': [[format_fraction(x) for x in row] for row in self.gram.to_dense()],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> 'ShiftedPairing':
        space = GradedVectorSpace({int(k): int(v) for k, v in payload['dims'].items()})
        gram = RationalMatrix.from_dense(payload['gram'], cols=space.total_dim) if payload['gram'] else \
            RationalMatrix.zeros(space.total_dim, space.total_dim)
        return cls(space, gram, int(payload['degree']), payload.get('symmetry'), name=payload.get('name', ''))

    def __repr__(self) -> str:
        return f"ShiftedPairing({self.name or 'unnamed'}, degree={self.degree}, symmetry={self.symmetry})"


def sign_matrix(space: GradedVectorSpace) -> RationalMatrix:
    """diag((-1)^{|e|}) on the flat basis."""
    return RationalMatrix(space.total_dim, space.total_dim,
                          {i: {i: Fraction((-1) ** (d % 2))} for i, d in enumerate(space.degree_list)})


def pairing_invariance_defect(complex_: CochainComplex, pairing: ShiftedPairing) -> ShiftedPairing:
    """
    The form D(e1, e2) = B(Q e1, e2) + (-1)^{|e1|} B(e1, Q e2), of degree p + 1.

    D vanishes identically iff Q is a derivation for B.
    """
    if complex_.space != pairing.space:
        raise DegreeError("Pairing and complex live on different spaces")
    q = complex_.differential
    gram = q.transpose() @ pairing.gram + sign_matrix(complex_.space) @ pairing.gram @ q
    return ShiftedPairing(complex_.space, gram, pairing.degree + 1, None,
                          name=f"defect({pairing.name})", check=False)


def is_invariant(complex_: CochainComplex, pairing: ShiftedPairing) -> bool:
    return pairing_invariance_defect(complex_, pairing).is_zero()


def shift_pairing(pairing: ShiftedPairing, k: int = 1) -> ShiftedPairing:
    """
    Transport B along C -> C[k]: B'(s x, s y) = (-1)^{|x|} B(x, y) per unit shift.

    Each unit shift raises the pairing degree by 2 and flips the symmetry.
    """
    gram = pairing.gram
    degrees = list(pairing.space.degree_list)
    for _ in range(k):
        signs = RationalMatrix(len(degrees), len(degrees),
                               {i: {i: Fraction((-1) ** (d % 2))} for i, d in enumerate(degrees)})
        gram = signs @ gram
        degrees = [d - 1 for d in degrees]
    space = GradedVectorSpace.from_degree_list(degrees, pairing.space.flat_labels())
    symmetry = None if pairing.symmetry is None else pairing.symmetry * (-1) ** (k % 2)
    return ShiftedPairing(space, gram, pairing.degree + 2 * k, symmetry, name=f"{pairing.name}[{k}]")


# --- constructions ---

def shift(complex_: CochainComplex, k: int) -> CochainComplex:
    """C[k]^n = C^{n+k}, with differential (-1)^k d."""
    if k == 0:
        return complex_
    degrees = [d - k for d in complex_.space.degree_list]
    space = GradedVectorSpace.from_degree_list(degrees, complex_.space.flat_labels())
    return CochainComplex(space, complex_.differential.scale((-1) ** (k % 2)),
                          name=f"{complex_.name}[{k}]", check=False)


def tensor_basis(space1: GradedVectorSpace, space2: GradedVectorSpace) -> List[Tuple[int, int]]:
    """Flat basis of a tensor product: pairs (a, b) sorted by total degree, then first-factor index."""
    pairs = [(a, b) for a in range(space1.total_dim) for b in range(space2.total_dim)]
    deg1, deg2 = space1.degree_list, space2.degree_list
    return sorted(pairs, key=lambda ab: (deg1[ab[0]] + deg2[ab[1]], ab[0], ab[1]))


def tensor(c1: CochainComplex, c2: CochainComplex) -> CochainComplex:
    """Tensor product with d(a x b) = da x b + (-1)^{|a|} a x db."""
    basis = tensor_basis(c1.space, c2.space)
    position = {ab: n for n, ab in enumerate(basis)}
    deg1, deg2 = c1.space.degree_list, c2.space.degree_list
    labels1, labels2 = c1.space.flat_labels(), c2.space.flat_labels()
    cols1, cols2 = c1.differential.columns(), c2.differential.columns()
    entries = []
    for n, (a, b) in enumerate(basis):
        for a2, v in cols1[a].items():
            entries.append((position[(a2, b)], n, v))
        sign = (-1) ** (deg1[a] % 2)
        for b2, v in cols2[b].items():
            entries.append((position[(a, b2)], n, sign * v))
    space = GradedVectorSpace.from_degree_list([deg1[a] + deg2[b] for a, b in basis],
                                               [f"{labels1[a]}⊗{labels2[b]}" for a, b in basis])
    total = len(basis)
    return CochainComplex(space, RationalMatrix.from_entries(total, total, entries),
                          name=f"({c1.name}⊗{c2.name})", check=False)


def tensor_pairing(b1: ShiftedPairing, b2: ShiftedPairing) -> ShiftedPairing:
    """<a x x, b x y> = (-1)^{|x||b|} B1(a, b) B2(x, y) on the tensor basis."""
    basis = tensor_basis(b1.space, b2.space)
    position = {ab: n for n, ab in enumerate(basis)}
    deg1, deg2 = b1.space.degree_list, b2.space.degree_list
    entries = []
    for a, b, v1 in b1.gram.entries():
        for x, y, v2 in b2.gram.entries():
            sign = (-1) ** ((deg2[x] * deg1[b]) % 2)
            entries.append((position[(a, x)], position[(b, y)], sign * v1 * v2))
    space = GradedVectorSpace.from_degree_list([deg1[a] + deg2[b] for a, b in basis])
    symmetry = None if b1.symmetry is None or b2.symmetry is None else b1.symmetry * b2.symmetry
    total = len(basis)
    return ShiftedPairing(space, RationalMatrix.from_entries(total, total, entries),
                          b1.degree + b2.degree, symmetry, name=f"{b1.name}⊗{b2.name}")


def direct_sum_positions(spaces: Sequence[GradedVectorSpace]) -> List[List[int]]:
    """For each summand, the flat positions of its basis vectors inside the direct sum."""
    tagged = []
    for s, space in enumerate(spaces):
        for i, d in enumerate(space.degree_list):
            tagged.append((d, s, i))
    tagged.sort()
    positions: List[List[int]] = [[0] * space.total_dim for space in spaces]
    for n, (_, s, i) in enumerate(tagged):
        positions[s][i] = n
    return positions


def direct_sum(*complexes: CochainComplex) -> CochainComplex:
    positions = direct_sum_positions([c.space for c in complexes])
    total = sum(c.dim for c in complexes)
    degrees = [0] * total
    labels = [''] * total
    entries = []
    for c, pos in zip(complexes, positions):
        for i, label in enumerate(c.space.flat_labels()):
            degrees[pos[i]] = c.space.degree_of(i)
            labels[pos[i]] = label
        entries.extend((pos[i], pos[j], v) for i, j, v in c.differential.entries())
    space = GradedVectorSpace.from_degree_list(degrees, labels)
    return CochainComplex(space, RationalMatrix.from_entries(total, total, entries),
                          name='⊕'.join(c.name for c in complexes), check=False)


def dual_positions(space: GradedVectorSpace) -> List[int]:
    """Flat position in the dual of the functional dual to each basis vector."""
    order = sorted(range(space.total_dim), key=lambda i: (-space.degree_of(i), i))
    positions = [0] * space.total_dim
    for n, i in enumerate(order):
        positions[i] = n
    return positions


def dual(complex_: CochainComplex) -> CochainComplex:
    """(C^v)^n = (C^{-n})^v with differential -d^T, so that dual(dual(C)) = C."""
    positions = dual_positions(complex_.space)
    total = complex_.dim
    degrees = [0] * total
    labels = [''] * total
    for i, label in enumerate(complex_.space.flat_labels()):
        degrees[positions[i]] = -complex_.space.degree_of(i)
        labels[positions[i]] = label[:-1] if label.endswith('∨') else f"{label}∨"
    entries = [(positions[j], positions[i], -v) for i, j, v in complex_.differential.entries()]
    space = GradedVectorSpace.from_degree_list(degrees, labels)
    return CochainComplex(space, RationalMatrix.from_entries(total, total, entries),
                          name=f"{complex_.name}∨", check=False)


# --- deformation retractions ---

@dataclass
class RetractionCheck:
    inclusion_chain_map: bool
    projection_chain_map: bool
    projection_inclusion: bool
    homotopy_equation: bool
    side_ki: bool
    side_pk: bool
    side_kk: bool

    @property
    def all_hold(self) -> bool:
        return all(vars(self).values())

    def failed(self) -> List[str]:
        return [name for name, ok in vars(self).items() if not ok]


class DeformationRetraction:
    """
    Data (i, p, k) between a big complex and a small complex with p i = 1 and i p - 1 = d k + k d.

    inclusion is big x small, projection small x big, homotopy big x big of degree -1.
    """

    def __init__(self, big: CochainComplex, small: CochainComplex, inclusion: RationalMatrix,
                 projection: RationalMatrix, homotopy: RationalMatrix, name: str = '',
                 check: bool = True):
        self.big = big
        self.small = small
        self.inclusion = inclusion
        self.projection = projection
        self.homotopy = homotopy
        self.name = name
        if check:
            _check_homogeneous(inclusion, small.space, big.space, 0, 'inclusion')
            _check_homogeneous(projection, big.space, small.space, 0, 'projection')
            _check_homogeneous(homotopy, big.space, big.space, -1, 'homotopy')
            result = self.check()
            core = [result.inclusion_chain_map, result.projection_chain_map,
                    result.projection_inclusion, result.homotopy_equation]
            if not all(core):
                raise NotAComplexError(f"Retraction {name} fails: {', '.join(result.failed())}")

    @classmethod
    def identity(cls, complex_: CochainComplex) -> 'DeformationRetraction':
        n = complex_.dim
        return cls(complex_, complex_, RationalMatrix.identity(n), RationalMatrix.identity(n),
                   RationalMatrix.zeros(n, n), name='id', check=False)

    def check(self) -> RetractionCheck:
        d, ds = self.big.differential, self.small.differential
        i, p, k = self.inclusion, self.projection, self.homotopy
        n = self.big.dim
        return RetractionCheck(
            inclusion_chain_map=(d @ i) == (i @ ds),
            projection_chain_map=(ds @ p) == (p @ d),
            projection_inclusion=(p @ i) == RationalMatrix.identity(self.small.dim),
            homotopy_equation=(i @ p) - RationalMatrix.identity(n) == (d @ k) + (k @ d),
            side_ki=(k @ i).is_zero(),
            side_pk=(p @ k).is_zero(),
            side_kk=(k @ k).is_zero(),
        )

    def normalized(self) -> 'DeformationRetraction':
        """
        Enforce the side conditions: k1 = pi k pi with pi = i p - 1, then k2 = -k1 d k1.
        """
        n = self.big.dim
        pi = self.inclusion @ self.projection - RationalMatrix.identity(n)
        k1 = pi @ self.homotopy @ pi
        k2 = -(k1 @ self.big.differential @ k1)
        return DeformationRetraction(self.big, self.small, self.inclusion, self.projection, k2,
                                     name=self.name, check=False)


def hpl(retraction: DeformationRetraction, perturbation: RationalMatrix,
        iteration_bound: Optional[int] = None, name: str = '') -> DeformationRetraction:
    """
    Homological perturbation lemma.

    With A = sum_n (delta k)^n delta the perturbed data are d' = d_small + p A i, i' = i + k A i,
    p' = p + p A k and k' = k + k A k. The series must terminate within iteration_bound terms.

    Raises:
        PerturbationError: if (d + delta)^2 != 0 or delta k is not nilpotent within the bound
    """
    big = retraction.big
    n = big.dim
    _check_homogeneous(perturbation, big.space, big.space, 1, 'perturbation')
    perturbed = big.differential + perturbation
    if not (perturbed @ perturbed).is_zero():
        raise PerturbationError(f"Perturbed differential of {big.name or 'complex'} does not square to zero")
    if perturbation.is_zero():
        return retraction
    bound = iteration_bound if iteration_bound is not None else n + 1
    k = retraction.homotopy
    term = perturbation
    series = RationalMatrix.zeros(n, n)
    for step in range(bound + 1):
        if term.is_zero():
            logger.debug(f"Perturbation series terminated after {step} terms")
            break
        series = series + term
        term = perturbation @ k @ term
    else:
        raise PerturbationError(f"Perturbation series did not terminate within {bound} terms")
    i, p = retraction.inclusion, retraction.projection
    small_d = retraction.small.differential + p @ series @ i
    new_big = CochainComplex(big.space, perturbed, name=f"{big.name}+δ", check=False)
    small = retraction.small
    try:
        new_small = CochainComplex(small.space, small_d, name=f"{small.name}'")
    except GradedAlgebraError as e:
        raise PerturbationError(f"Perturbed small differential is invalid: {e}")
    result = DeformationRetraction(
        new_big, new_small,
        i + k @ series @ i,
        p + p @ series @ k,
        k + k @ series @ k,
        name=name or f"{retraction.name}'",
        check=False,
    )
    status = result.check()
    if not status.all_hold:
        raise PerturbationError(f"Perturbed retraction fails: {', '.join(status.failed())}")
    return result


def parse_matrix(rows: Sequence[Sequence], n_rows: int, n_cols: int) -> RationalMatrix:
    """Parse a dense matrix of ints or "p/q" strings, checking its shape."""
    if len(rows) != n_rows:
        raise ValueError(f"Expected {n_rows} rows, got {len(rows)}")
    return RationalMatrix.from_dense([[to_fraction(x) for x in row] for row in rows], cols=n_cols)


def direct_sum_pairing(*pairings: ShiftedPairing) -> ShiftedPairing:
    """Orthogonal sum of pairings of one degree, on the basis produced by direct_sum."""
    degree = pairings[0].degree
    if any(p.degree != degree for p in pairings):
        raise DegreeError("Only pairings of equal degree can be summed")
    positions = direct_sum_positions([p.space for p in pairings])
    total = sum(p.space.total_dim for p in pairings)
    degrees = [0] * total
    entries = []
    for p, pos in zip(pairings, positions):
        for i, d in enumerate(p.space.degree_list):
            degrees[pos[i]] = d
        entries.extend((pos[a], pos[b], v) for a, b, v in p.gram.entries())
    symmetries = {p.symmetry for p in pairings}
    symmetry = symmetries.pop() if len(symmetries) == 1 else None
    return ShiftedPairing(GradedVectorSpace.from_degree_list(degrees),
                          RationalMatrix.from_entries(total, total, entries), degree, symmetry,
                          name='⊕'.join(p.name for p in pairings))


def shift_retraction(retraction: DeformationRetraction, k: int = 1) -> DeformationRetraction:
    """Transport (i, p, k) along the shift [k]; the homotopy picks up the sign (-1)^k."""
    return DeformationRetraction(shift(retraction.big, k), shift(retraction.small, k),
                                 retraction.inclusion, retraction.projection,
                                 retraction.homotopy.scale((-1) ** (k % 2)),
                                 name=f"{retraction.name}[{k}]", check=False)


def acyclic_contraction(complex_: CochainComplex, name: str = '') -> DeformationRetraction:
    """
    A contraction of an acyclic complex onto zero: k with d k + k d = -1 and k k = 0.

    Each C^{n+1} is split as B^{n+1} + W^{n+1}, where W^n is spanned by the basis vectors whose images
    are independent; k inverts d from W^n onto B^{n+1} with a minus sign.

    Raises:
        NotAComplexError: if the complex has cohomology
    """
    space = complex_.space
    chosen: Dict[int, List[int]] = {}
    for degree in space.dims:
        reducer = IncrementalReducer()
        block = complex_.block(degree).columns()
        chosen[degree] = [j for j, column in enumerate(block) if reducer.add(column)]
    entries = []
    for degree in space.dims:
        source = chosen.get(degree - 1, [])
        complement = chosen.get(degree, [])
        dim = space.dim(degree)
        if len(source) + len(complement) != dim:
            raise NotAComplexError(f"{complex_.name or 'Complex'} is not acyclic in degree {degree}")
        if not dim:
            continue
        images = complex_.block(degree - 1).columns() if source else []
        splitting = RationalMatrix.from_columns(dim, [images[j] for j in source] +
                                                [{j: Fraction(1)} for j in complement])
        coordinates = inverse(splitting)
        row_offset, col_offset = space.offset(degree - 1), space.offset(degree)
        for position, j in enumerate(source):
            for col, value in coordinates.row(position).items():
                entries.append((row_offset + j, col_offset + col, -value))
    n = complex_.dim
    zero = CochainComplex(GradedVectorSpace({}), name='0')
    contraction = DeformationRetraction(
        complex_, zero, RationalMatrix.zeros(n, 0), RationalMatrix.zeros(0, n),
        RationalMatrix.from_entries(n, n, entries), name=name or f"contract({complex_.name})")
    return contraction.normalized()
