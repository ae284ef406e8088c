# utils/algebras.py
"""
Algebraic targets of the boundary correspondence: the Weyl algebra and its Fock module, the constant
Moyal star product, exterior algebras with the Koszul pairing, and the Lichnerowicz and Brylinski
complexes of a constant Poisson bivector.

Polynomials are sparse maps (exponent tuple, hbar power) -> Fraction. Products of the form
m o exp(hbar sum C_ij d_i (x) d_j) are computed one contraction pair at a time.
"""

import logging
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from utils.bv_engine import SymComplex, SymAlgebra, SymElement, balanced_monomials
from utils.graded_core import CochainComplex, GradedVectorSpace, ModelError, cohomology_dims
from utils.linear_algebra import RationalMatrix, rank

logger = logging.getLogger('BVFactorize.algebras')

Exponents = Tuple[int, ...]
PolyKey = Tuple[Exponents, int]


class PolyElement:
    """A polynomial in n commuting variables with Q[hbar] coefficients."""

    __slots__ = ('n', 'terms')

    def __init__(self, n: int, terms: Optional[Dict[PolyKey, Fraction]] = None):
        self.n = n
        self.terms: Dict[PolyKey, Fraction] = {}
        for (exps, h), value in (terms or {}).items():
            if len(exps) != n:
                raise ModelError(f"Exponent tuple {exps} does not have {n} entries")
            if value:
                self.terms[(tuple(exps), h)] = Fraction(value)

    @classmethod
    def constant(cls, n: int, value=1, hbar_power: int = 0):
        return cls(n, {((0,) * n, hbar_power): Fraction(value)})

    @classmethod
    def variable(cls, n: int, i: int):
        exps = [0] * n
        exps[i] = 1
        return cls(n, {(tuple(exps), 0): Fraction(1)})

    @classmethod
    def monomial(cls, exps: Sequence[int], coefficient=1, hbar_power: int = 0):
        return cls(len(exps), {(tuple(exps), hbar_power): Fraction(coefficient)})

    def _new(self, terms: Dict[PolyKey, Fraction]) -> 'PolyElement':
        result = PolyElement.__new__(type(self))
        PolyElement.__init__(result, self.n, terms)
        for slot in getattr(type(self), '__slots__', ()):
            if slot not in PolyElement.__slots__:
                setattr(result, slot, getattr(self, slot))
        return result

    def __add__(self, other: 'PolyElement') -> 'PolyElement':
        terms = dict(self.terms)
        for key, value in other.terms.items():
            terms[key] = terms.get(key, 0) + value
        return self._new(terms)

    def __sub__(self, other: 'PolyElement') -> 'PolyElement':
        return self + other.scale(-1)

    def scale(self, factor) -> 'PolyElement':
        return self._new({k: v * factor for k, v in self.terms.items()})

    def __mul__(self, other: 'PolyElement') -> 'PolyElement':
        """The commutative product."""
        terms: Dict[PolyKey, Fraction] = {}
        for (e1, h1), a in self.terms.items():
            for (e2, h2), b in other.terms.items():
                key = (tuple(x + y for x, y in zip(e1, e2)), h1 + h2)
                terms[key] = terms.get(key, 0) + a * b
        return self._new(terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyElement):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __repr__(self) -> str:
        return f"{type(self).__name__}({len(self.terms)} terms)"

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exps: Sequence[int], hbar_power: int = 0) -> Fraction:
        return self.terms.get((tuple(exps), hbar_power), Fraction(0))

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def derivative(self, i: int) -> 'PolyElement':
        terms: Dict[PolyKey, Fraction] = {}
        for (exps, h), value in self.terms.items():
            if exps[i]:
                new = list(exps)
                new[i] -= 1
                key = (tuple(new), h)
                terms[key] = terms.get(key, 0) + value * exps[i]
        return self._new(terms)

    def specialize_hbar(self, value=0) -> 'PolyElement':
        terms: Dict[PolyKey, Fraction] = {}
        for (exps, h), coeff in self.terms.items():
            key = (exps, 0)
            terms[key] = terms.get(key, 0) + coeff * Fraction(value) ** h
        return self._new(terms)

    def to_json(self) -> List[dict]:
        return [{'exponents': list(e), 'hbar': h, 'coeff': str(v)} for (e, h), v in sorted(self.terms.items())]


def _falling(n: int, k: int) -> int:
    return factorial(n) // factorial(n - k)


def exponential_product(a: PolyElement, b: PolyElement,
                        contractions: Dict[Tuple[int, int], Fraction]) -> Dict[PolyKey, Fraction]:
    """m o prod_{(i,j)} exp(hbar C_ij d_i (x) d_j) applied to a (x) b."""
    pairs: Dict[Tuple[PolyKey, PolyKey], Fraction] = {}
    for ka, va in a.terms.items():
        for kb, vb in b.terms.items():
            pairs[(ka, kb)] = va * vb
    for (i, j), c in contractions.items():
        if not c:
            continue
        following: Dict[Tuple[PolyKey, PolyKey], Fraction] = {}
        for ((ea, ha), (eb, hb)), value in pairs.items():
            for k in range(min(ea[i], eb[j]) + 1):
                weight = value * c ** k * _falling(ea[i], k) * _falling(eb[j], k) / factorial(k)
                new_a, new_b = list(ea), list(eb)
                new_a[i] -= k
                new_b[j] -= k
                key = ((tuple(new_a), ha + k), (tuple(new_b), hb))
                following[key] = following.get(key, 0) + weight
        pairs = following
    result: Dict[PolyKey, Fraction] = {}
    for ((ea, ha), (eb, hb)), value in pairs.items():
        key = (tuple(x + y for x, y in zip(ea, eb)), ha + hb)
        result[key] = result.get(key, 0) + value
    return result


# --- Weyl algebra and Fock module ---

class WeylAlgebra:
    """
    W(V) for a degree-0 symplectic space, with elements normal ordered so that the Lagrangian L is
    written to the left of its complement. vw - wv = hbar omega(v, w).

    Raises:
        ModelError: if omega is not antisymmetric or L, L⊥ are not both isotropic
    """

    def __init__(self, omega: RationalMatrix, lagrangian: Sequence[int], name: str = 'W(V)'):
        n = omega.rows
        if omega.shape != (n, n) or omega.transpose() != -omega:
            raise ModelError("omega must be an antisymmetric square matrix")
        self.n = n
        self.omega = omega
        self.lagrangian = sorted(lagrangian)
        self.complement = [i for i in range(n) if i not in set(self.lagrangian)]
        self.name = name
        if not omega.submatrix(self.lagrangian, self.lagrangian).is_zero():
            raise ModelError("L is not isotropic for omega")
        if not omega.submatrix(self.complement, self.complement).is_zero():
            raise ModelError("The complement of L is not isotropic for omega")
        self.contractions = {(i, j): omega[i, j] for i in self.complement for j in self.lagrangian
                             if omega[i, j]}

    def element(self, terms: Dict[PolyKey, Fraction]) -> 'WeylElement':
        return WeylElement(self, terms)

    def generator(self, i: int) -> 'WeylElement':
        return WeylElement(self, PolyElement.variable(self.n, i).terms)

    def constant(self, value=1, hbar_power: int = 0) -> 'WeylElement':
        return WeylElement(self, PolyElement.constant(self.n, value, hbar_power).terms)

    def fock_space(self) -> 'FockModule':
        return FockModule(self)


class WeylElement(PolyElement):
    __slots__ = ('algebra',)

    def __init__(self, algebra: WeylAlgebra, terms: Optional[Dict[PolyKey, Fraction]] = None):
        super().__init__(algebra.n, terms)
        self.algebra = algebra


class FockModule:
    """F(L) = W(V) / L W(V), identified with polynomials on the complement of L."""

    def __init__(self, algebra: WeylAlgebra):
        self.algebra = algebra
        self.n = len(algebra.complement)

    def vacuum(self) -> 'FockElement':
        return FockElement(self, PolyElement.constant(self.n).terms)

    def generator(self, position: int) -> 'FockElement':
        """The image of the position-th complement generator."""
        return FockElement(self, PolyElement.variable(self.n, position).terms)

    def lift(self, f: 'FockElement') -> WeylElement:
        terms = {}
        for (exps, h), value in f.terms.items():
            full = [0] * self.algebra.n
            for position, i in enumerate(self.algebra.complement):
                full[i] = exps[position]
            terms[(tuple(full), h)] = value
        return self.algebra.element(terms)

    def project(self, a: WeylElement) -> 'FockElement':
        """Drop normal-ordered terms containing a generator of L."""
        terms = {}
        for (exps, h), value in a.terms.items():
            if any(exps[i] for i in self.algebra.lagrangian):
                continue
            key = (tuple(exps[i] for i in self.algebra.complement), h)
            terms[key] = terms.get(key, 0) + value
        return FockElement(self, terms)

    @staticmethod
    def dimension(n_complement: int, degree: int) -> int:
        """dim Sym^degree(V/L)."""
        return comb(n_complement + degree - 1, degree) if n_complement else int(degree == 0)


class FockElement(PolyElement):
    __slots__ = ('module',)

    def __init__(self, module: FockModule, terms: Optional[Dict[PolyKey, Fraction]] = None):
        super().__init__(module.n, terms)
        self.module = module


def weyl_product(a: WeylElement, b: WeylElement) -> WeylElement:
    """
    Normal-ordered product: contractions of L⊥ factors of a with L factors of b, each weighted by
    hbar omega.

    Raises:
        ModelError: if the factors belong to different Weyl algebras
    """
    if a.algebra is not b.algebra:
        raise ModelError("Cannot multiply elements of different Weyl algebras")
    return a.algebra.element(exponential_product(a, b, a.algebra.contractions))


def fock_action(f: FockElement, a: WeylElement) -> FockElement:
    """The right action f . a = [lift(f) a] on F(L)."""
    module = f.module
    if module.algebra is not a.algebra:
        raise ModelError("Fock element and Weyl element come from different algebras")
    return module.project(weyl_product(module.lift(f), a))


def star_product(f: PolyElement, g: PolyElement, pi: RationalMatrix) -> PolyElement:
    """
    Moyal product on Sym(V∨)[hbar]: f * g = m o exp((hbar/2) sum Pi_ab d_a (x) d_b)(f (x) g), so that
    nu_a * nu_b - nu_b * nu_a = hbar Pi_ab.
    """
    if f.n != g.n or pi.shape != (f.n, f.n):
        raise ModelError(f"Star product of polynomials in {f.n} and {g.n} variables with a {pi.shape} bivector")
    contractions = {(a, b): v / 2 for a, b, v in pi.entries()}
    return PolyElement(f.n, exponential_product(f, g, contractions))


def symbol_map(f: PolyElement, algebra: WeylAlgebra) -> PolyElement:
    """T = exp((hbar/2) sum_{i in L⊥, j in L} omega_ij d_i d_j), taking Moyal products to normal order."""
    result = PolyElement(f.n, f.terms)
    term = PolyElement(f.n, f.terms)
    k = 0
    while not term.is_zero():
        k += 1
        following = PolyElement(f.n)
        for (i, j), c in algebra.contractions.items():
            second = term.derivative(i).derivative(j)
            shifted = {(e, h + 1): v * c / 2 / k for (e, h), v in second.terms.items()}
            following = following + PolyElement(f.n, shifted)
        term = following
        result = result + term
    return result


# --- exterior algebra and the Koszul pairing ---

class ExteriorElement:
    """An element of Λ(V): sorted index tuples -> Fraction, generators in degree 1."""

    __slots__ = ('n', 'terms')

    def __init__(self, n: int, terms: Optional[Dict[Tuple[int, ...], Fraction]] = None):
        self.n = n
        self.terms = {tuple(k): Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def generator(cls, n: int, i: int) -> 'ExteriorElement':
        return cls(n, {(i,): Fraction(1)})

    @classmethod
    def unit(cls, n: int) -> 'ExteriorElement':
        return cls(n, {(): Fraction(1)})

    def wedge(self, other: 'ExteriorElement') -> 'ExteriorElement':
        terms: Dict[Tuple[int, ...], Fraction] = {}
        for s, a in self.terms.items():
            for t, b in other.terms.items():
                if set(s) & set(t):
                    continue
                inversions = sum(1 for x in s for y in t if x > y)
                key = tuple(sorted(s + t))
                terms[key] = terms.get(key, 0) + (-1) ** inversions * a * b
        return ExteriorElement(self.n, terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExteriorElement):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    @staticmethod
    def dimension(n: int) -> int:
        return 2 ** n


def aug_sym(f: PolyElement) -> Fraction:
    return f.coefficient((0,) * f.n)


def aug_ext(lam: ExteriorElement) -> Fraction:
    return lam.terms.get((), Fraction(0))


def koszul_pairing(f: PolyElement, lam: ExteriorElement) -> Fraction:
    """q: Sym(V∨) (x) Λ(V) -> Q, whose restriction to either factor is the augmentation."""
    if f.n != lam.n:
        raise ModelError(f"Koszul pairing of Sym on {f.n} and Λ on {lam.n} generators")
    return aug_sym(f) * aug_ext(lam)


# --- Poisson complexes ---

def poisson_base_complex(pi: RationalMatrix) -> CochainComplex:
    """V∨ in degree 0 -> V[-1] in degree 1, nu_j -> sum_i Pi_ij v_i."""
    n = pi.rows
    labels = {0: [f"x{i}" for i in range(n)], 1: [f"ξ{i}" for i in range(n)]}
    return CochainComplex.from_blocks({0: n, 1: n}, {0: pi}, labels=labels, name='V∨->V[-1]')


def lichnerowicz_cohomology(pi: RationalMatrix, poly_cut: int) -> Dict[Tuple[int, int], int]:
    """
    Cohomology of (Sym(V∨ ⊕ V[-1]), [Pi, -]) by bidegree (polynomial degree, form degree).

    [Pi, -] preserves total Sym-degree, so each Sym-degree piece up to poly_cut is computed exactly;
    bidegrees with polynomial degree above poly_cut - 1 are withheld.
    """
    if poly_cut < 1:
        raise ModelError(f"poly_cut must be at least 1, got {poly_cut}")
    sym = SymComplex(poisson_base_complex(pi), None, poly_cut, name='Polyvectors')
    result: Dict[Tuple[int, int], int] = {}
    for s in range(poly_cut + 1):
        piece = sym.complex.restrict(sym.sym_degree_indices(s), name=f"Sym^{s}")
        for b, dim in cohomology_dims(piece).items():
            if dim and s - b <= poly_cut - 1:
                result[(s - b, b)] = dim
    logger.debug(f"Lichnerowicz cohomology up to poly_cut={poly_cut}: {result}")
    return result


def lichnerowicz_expected(pi: RationalMatrix, poly_cut: int) -> Dict[Tuple[int, int], int]:
    """Sym(ker Pi) (x) Λ(coker Pi) in the same bidegree window."""
    k = pi.rows - rank(pi)
    result = {}
    for b in range(k + 1):
        for a in range(poly_cut):
            if a + b > poly_cut:
                continue
            dim = FockModule.dimension(k, a) * comb(k, b)
            if dim:
                result[(a, b)] = dim
    return result


class PolyVector:
    """A polyvector field: (x exponents, sorted ξ indices) -> Fraction, of bidegree (poly, form)."""

    def __init__(self, n: int, terms: Optional[Dict[Tuple[Exponents, Tuple[int, ...]], Fraction]] = None):
        self.n = n
        self.terms = {(tuple(e), tuple(s)): Fraction(v) for (e, s), v in (terms or {}).items() if v}

    def bidegrees(self) -> List[Tuple[int, int]]:
        return sorted({(sum(e), len(s)) for e, s in self.terms})

    def lichnerowicz(self, pi: RationalMatrix) -> 'PolyVector':
        """[Pi, x^a ξ_S] = sum_j a_j x^{a - e_j} (sum_i Pi_ij ξ_i) ξ_S."""
        terms: Dict[Tuple[Exponents, Tuple[int, ...]], Fraction] = {}
        columns = pi.columns()
        for (exps, forms), value in self.terms.items():
            for j, power in enumerate(exps):
                if not power:
                    continue
                lowered = list(exps)
                lowered[j] -= 1
                for i, entry in columns[j].items():
                    if i in forms:
                        continue
                    sign = (-1) ** sum(1 for s in forms if s < i)
                    key = (tuple(lowered), tuple(sorted(forms + (i,))))
                    terms[key] = terms.get(key, 0) + sign * power * entry * value
        return PolyVector(self.n, terms)

    def to_sym(self) -> SymElement:
        """The same element in the symmetric algebra of poisson_base_complex."""
        terms = {}
        for (exps, forms), value in self.terms.items():
            mono = tuple(i for i, e in enumerate(exps) for _ in range(e)) + tuple(self.n + s for s in forms)
            terms[(mono, 0)] = value
        return SymElement(terms)


def brylinski_pairing_gram(pi: RationalMatrix) -> RationalMatrix:
    """On ξ (degree -1, indices 0..n-1) and x (degree 0, indices n..2n-1): B(x_i, ξ_j) = B(ξ_j, x_i) = Pi_ij."""
    n = pi.rows
    entries = []
    for i, j, v in pi.entries():
        entries += [(n + i, j, v), (j, n + i, v)]
    return RationalMatrix.from_entries(2 * n, 2 * n, entries)


def brylinski_homology(pi: RationalMatrix, poly_cut: int) -> Dict[int, int]:
    """
    Homology of the canonical complex (Sym(V∨) (x) Λ(V∨), d_Pi) at hbar = 1, where d_Pi contracts one
    form with one polynomial factor through Pi.

    d_Pi preserves (#x - #ξ), so the pieces with balance -n .. poly_cut - n are finite and computed
    exactly; they cover every polynomial degree up to poly_cut.
    """
    n = pi.rows
    degrees = [-1] * n + [0] * n
    algebra = SymAlgebra(degrees, sym_cut=poly_cut + n)
    gram = brylinski_pairing_gram(pi)
    odd, even = list(range(n)), list(range(n, 2 * n))
    totals: Dict[int, int] = {}
    for balance in range(-n, poly_cut - n + 1):
        monos = balanced_monomials(odd, even, balance)
        monos.sort(key=lambda m: (algebra.degree(m), m))
        index = {m: k for k, m in enumerate(monos)}
        entries = []
        for col, mono in enumerate(monos):
            for image, value in algebra.laplacian(gram, mono).items():
                entries.append((index[image], col, value))
        space = GradedVectorSpace.from_degree_list([algebra.degree(m) for m in monos])
        piece = CochainComplex(space, RationalMatrix.from_entries(len(monos), len(monos), entries),
                               name=f"canonical piece {balance}")
        for degree, dim in cohomology_dims(piece).items():
            if dim:
                totals[degree] = totals.get(degree, 0) + dim
    logger.debug(f"Brylinski homology up to poly_cut={poly_cut}: {totals}")
    return dict(sorted(totals.items()))


def brylinski_window(pi: RationalMatrix) -> Tuple[int, int]:
    """Degrees -dim V .. -(dim V - dim ker Pi)."""
    n = pi.rows
    kernel_dim = n - rank(pi)
    return -n, -(n - kernel_dim)


# --- Poisson data ---

def symplectic_block(n: int) -> RationalMatrix:
    """Pi with Pi_{2i, 2i+1} = 1 = -Pi_{2i+1, 2i} on the first 2*(n // 2) coordinates."""
    entries = []
    for i in range(n // 2):
        entries += [(2 * i, 2 * i + 1, 1), (2 * i + 1, 2 * i, -1)]
    return RationalMatrix.from_entries(n, n, entries)


def rank_deficient(n: int) -> RationalMatrix:
    """One symplectic block and n - 2 kernel directions."""
    if n < 2:
        return RationalMatrix.zeros(n, n)
    return RationalMatrix.from_entries(n, n, [(0, 1, 1), (1, 0, -1)])


def random_basis_change(n: int, seed: int = 0, bound: int = 3) -> RationalMatrix:
    """A random invertible integer matrix; sympy's exact determinant decides invertibility."""
    rng = np.random.default_rng(seed)
    while True:
        candidate = rng.integers(-bound, bound + 1, size=(n, n))
        if n == 0 or sympy.Matrix(candidate.tolist()).det() != 0:
            return RationalMatrix.from_dense([[int(x) for x in row] for row in candidate.tolist()], cols=n)


def change_basis(pi: RationalMatrix, matrix: RationalMatrix) -> RationalMatrix:
    """Pi in the new basis: A Pi A^T."""
    return matrix @ pi @ matrix.transpose()
