# utils/bv_engine.py
"""
Truncated symmetric algebras of graded complexes and the BV Laplacian.

Generators are the flat basis vectors of a generator complex F (typically the shifted fields E[1]).
A monomial is a nondecreasing tuple of generator indices in which odd generators occur at most once.
Elements carry a power of the formal variable hbar, which has degree 0. Truncations are hard caps:
Sym-degree <= sym_cut and hbar-degree <= hbar_cut, i.e. the quotient by hbar^{hbar_cut + 1} of the
subcomplex Sym^{<= sym_cut}, which is again a complex because Q preserves and Delta lowers Sym-degree.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from utils.graded_core import (
    ChainMap, CochainComplex, DeformationRetraction, DegreeError, GradedVectorSpace, ModelError,
    NotAComplexError, ShiftedPairing, TruncationError, cohomology_dims, hpl, pairing_invariance_defect
)
from utils.linear_algebra import RationalMatrix, Vector, format_fraction

logger = logging.getLogger('BVFactorize.bv_engine')

Monomial = Tuple[int, ...]
Key = Tuple[Monomial, int]


class SymElement:
    """Sparse combination of (monomial, hbar power) keys with Fraction coefficients."""

    __slots__ = ('terms',)

    def __init__(self, terms: Optional[Dict[Key, Fraction]] = None):
        self.terms: Dict[Key, Fraction] = {k: Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def unit(cls, hbar_power: int = 0) -> 'SymElement':
        return cls({((), hbar_power): Fraction(1)})

    def add_term(self, key: Key, value) -> None:
        new_value = self.terms.get(key, 0) + value
        if new_value:
            self.terms[key] = Fraction(new_value)
        else:
            self.terms.pop(key, None)

    def __add__(self, other: 'SymElement') -> 'SymElement':
        result = SymElement(self.terms)
        for key, value in other.terms.items():
            result.add_term(key, value)
        return result

    def __sub__(self, other: 'SymElement') -> 'SymElement':
        return self + other.scale(-1)

    def scale(self, factor) -> 'SymElement':
        return SymElement({k: v * factor for k, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymElement):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"SymElement({len(self.terms)} terms)"

    def to_json(self, degrees: Sequence[int]) -> List[dict]:
        """[{"monomial": [[degree, index, multiplicity], ...], "coeff": ["p/q" per hbar power]}]"""
        grouped: Dict[Monomial, Dict[int, Fraction]] = {}
        for (mono, h), value in self.terms.items():
            grouped.setdefault(mono, {})[h] = value
        payload = []
        for mono in sorted(grouped):
            counts: Dict[int, int] = {}
            for g in mono:
                counts[g] = counts.get(g, 0) + 1
            top = max(grouped[mono])
            payload.append({
                'monomial': [[degrees[g], g, c] for g, c in sorted(counts.items())],
                'coeff': [format_fraction(grouped[mono].get(h, Fraction(0))) for h in range(top + 1)],
            })
        return payload

    @classmethod
    def from_json(cls, payload: List[dict]) -> 'SymElement':
        result = cls()
        for item in payload:
            mono = tuple(sorted(g for _, g, c in item['monomial'] for _ in range(c)))
            for h, coeff in enumerate(item['coeff']):
                result.add_term((mono, h), Fraction(coeff))
        return result


class SymAlgebra:
    """Graded-commutative polynomial algebra on generators of the given degrees, with cutoffs."""

    def __init__(self, degrees: Sequence[int], sym_cut: int, hbar_cut: int = 0):
        if sym_cut < 0 or hbar_cut < 0:
            raise TruncationError(f"Cutoffs must be nonnegative, got sym_cut={sym_cut}, hbar_cut={hbar_cut}")
        self.degrees = list(degrees)
        self.sym_cut = sym_cut
        self.hbar_cut = hbar_cut

    @property
    def n_generators(self) -> int:
        return len(self.degrees)

    def is_odd(self, g: int) -> bool:
        return self.degrees[g] % 2 == 1

    def degree(self, mono: Monomial) -> int:
        return sum(self.degrees[g] for g in mono)

    def normal_form(self, sequence: Sequence[int]) -> Tuple[int, Optional[Monomial]]:
        """Sort a word of generators; return (Koszul sign, monomial) or (0, None) if it vanishes."""
        word = list(sequence)
        sign = 1
        # insertion sort, counting odd/odd transpositions
        for i in range(1, len(word)):
            j = i
            while j > 0 and word[j - 1] > word[j]:
                if self.is_odd(word[j - 1]) and self.is_odd(word[j]):
                    sign = -sign
                word[j - 1], word[j] = word[j], word[j - 1]
                j -= 1
        for a, b in zip(word, word[1:]):
            if a == b and self.is_odd(a):
                return 0, None
        return sign, tuple(word)

    def multiply_monomials(self, left: Monomial, right: Monomial) -> Tuple[int, Optional[Monomial]]:
        return self.normal_form(left + right)

    def product(self, x: SymElement, y: SymElement, enforce_cut: bool = True) -> SymElement:
        """Product in Sym[hbar]; raises TruncationError rather than dropping terms past a cutoff."""
        result = SymElement()
        for (m1, h1), a in x.terms.items():
            for (m2, h2), b in y.terms.items():
                sign, mono = self.multiply_monomials(m1, m2)
                if not sign:
                    continue
                if enforce_cut and (len(mono) > self.sym_cut or h1 + h2 > self.hbar_cut):
                    raise TruncationError(f"Product of Sym-degree {len(mono)} and hbar-degree {h1 + h2} "
                                          f"exceeds cutoffs ({self.sym_cut}, {self.hbar_cut})")
                result.add_term((mono, h1 + h2), sign * a * b)
        return result

    def generator(self, g: int, hbar_power: int = 0) -> SymElement:
        return SymElement({((g,), hbar_power): Fraction(1)})

    def monomials(self, max_length: Optional[int] = None) -> List[Monomial]:
        """All monomials of length <= max_length (default sym_cut), sorted by (length, indices)."""
        top = self.sym_cut if max_length is None else max_length
        result: List[Monomial] = []
        for length in range(top + 1):
            for mono in combinations_with_replacement(range(self.n_generators), length):
                if all(not (a == b and self.is_odd(a)) for a, b in zip(mono, mono[1:])):
                    result.append(mono)
        return result

    def expand_product(self, factors: Sequence[Dict[int, Fraction]]) -> Dict[Monomial, Fraction]:
        """Expand the ordered product of linear combinations of generators."""
        current: Dict[Monomial, Fraction] = {(): Fraction(1)}
        for factor in factors:
            following: Dict[Monomial, Fraction] = {}
            for mono, coeff in current.items():
                for g, value in factor.items():
                    sign, new_mono = self.multiply_monomials(mono, (g,))
                    if not sign:
                        continue
                    total = following.get(new_mono, 0) + sign * coeff * value
                    if total:
                        following[new_mono] = total
                    else:
                        following.pop(new_mono, None)
            current = following
            if not current:
                break
        return current

    def derivation(self, columns: Sequence[Dict[int, Fraction]], mono: Monomial,
                   degree: int = 1) -> Dict[Monomial, Fraction]:
        """Extend a linear map of the given degree (columns per generator) as a graded derivation."""
        result: Dict[Monomial, Fraction] = {}
        prefix_degree = 0
        for position, g in enumerate(mono):
            sign = -1 if (degree * prefix_degree) % 2 else 1
            for target, value in columns[g].items():
                word = mono[:position] + (target,) + mono[position + 1:]
                s, new_mono = self.normal_form(word)
                if s:
                    total = result.get(new_mono, 0) + sign * s * value
                    if total:
                        result[new_mono] = total
                    else:
                        result.pop(new_mono, None)
            prefix_degree += self.degrees[g]
        return result

    def laplacian(self, gram: RationalMatrix, mono: Monomial) -> Dict[Monomial, Fraction]:
        """
        Delta(g_1...g_n) = sum_{i<j} B(g_i, g_j) s_ij g_1..^i..^j..g_n, where s_ij is the Koszul sign
        of moving g_i and then g_j to the front.
        """
        result: Dict[Monomial, Fraction] = {}
        n = len(mono)
        degs = [self.degrees[g] for g in mono]
        for i in range(n):
            before_i = sum(degs[:i])
            for j in range(i + 1, n):
                value = gram[mono[i], mono[j]]
                if not value:
                    continue
                before_j = sum(degs[:j]) - degs[i]
                exponent = degs[i] * before_i + degs[j] * before_j
                sign = -1 if exponent % 2 else 1
                rest = mono[:i] + mono[i + 1:j] + mono[j + 1:]
                total = result.get(rest, 0) + sign * value
                if total:
                    result[rest] = total
                else:
                    result.pop(rest, None)
        return result

    def bracket(self, gram: RationalMatrix, g: int, word: Sequence[int]) -> Dict[Monomial, Fraction]:
        """{g, w_1...w_m}: the degree +1 bracket of a generator with a word, expanded as a derivation."""
        result: Dict[Monomial, Fraction] = {}
        shifted = self.degrees[g] + 1
        prefix_degree = 0
        for position, w in enumerate(word):
            value = gram[g, w]
            if value:
                sign = -1 if (shifted * prefix_degree) % 2 else 1
                s, rest = self.normal_form(tuple(word[:position]) + tuple(word[position + 1:]))
                if s:
                    total = result.get(rest, 0) + sign * s * value
                    if total:
                        result[rest] = total
                    else:
                        result.pop(rest, None)
            prefix_degree += self.degrees[w]
        return result

    def laplacian_recursive(self, gram: RationalMatrix, word: Sequence[int]) -> Dict[Monomial, Fraction]:
        """
        Delta computed from the defining recursion Delta(g R) = (-1)^{|g|} g Delta(R) + {g, R} with
        Delta vanishing on generators; independent of laplacian() and used to cross-check it.
        """
        if len(word) < 2:
            return {}
        head, tail = word[0], tuple(word[1:])
        result = dict(self.bracket(gram, head, tail))
        sign = -1 if self.is_odd(head) else 1
        for mono, value in self.laplacian_recursive(gram, tail).items():
            s, new_mono = self.multiply_monomials((head,), mono)
            if s:
                total = result.get(new_mono, 0) + sign * s * value
                if total:
                    result[new_mono] = total
                else:
                    result.pop(new_mono, None)
        return result


def laplacian_orderings_agree(algebra: SymAlgebra, gram: RationalMatrix, mono: Monomial) -> bool:
    """Evaluate the recursion on every ordering of the factors (with its Koszul sign) and compare."""
    reference = algebra.laplacian(gram, mono)
    for order in set(permutations(mono)):
        sign, _ = algebra.normal_form(order)
        if not sign:
            continue
        value = {m: sign * v for m, v in algebra.laplacian_recursive(gram, order).items()}
        if value != reference:
            return False
    return True


def seven_term_defect(algebra: SymAlgebra, gram: RationalMatrix, a: Monomial, b: Monomial,
                      c: Monomial) -> Dict[Monomial, Fraction]:
    """
    Delta(abc) - Delta(ab)c - (-1)^|a| a Delta(bc) - (-1)^{(|a|+1)|b|} b Delta(ac)
    + Delta(a)bc + (-1)^|a| a Delta(b) c + (-1)^{|a|+|b|} ab Delta(c); zero for a second-order operator.
    """
    da, db = algebra.degree(a), algebra.degree(b)
    result: Dict[Monomial, Fraction] = {}

    def accumulate(factor: int, left: Monomial, middle: Dict[Monomial, Fraction], right: Monomial):
        for mono, value in middle.items():
            s, word = algebra.normal_form(left + mono + right)
            if s:
                total = result.get(word, 0) + factor * s * value
                if total:
                    result[word] = total
                else:
                    result.pop(word, None)

    def lap(*parts: Monomial) -> Dict[Monomial, Fraction]:
        s, word = algebra.normal_form(sum(parts, ()))
        if not s:
            return {}
        return {m: s * v for m, v in algebra.laplacian(gram, word).items()}

    sa = -1 if da % 2 else 1
    accumulate(1, (), lap(a, b, c), ())
    accumulate(-1, (), lap(a, b), c)
    accumulate(-sa, a, lap(b, c), ())
    # b Delta(ac) with the sign of moving b past a and past Delta
    accumulate(-(-1 if ((da + 1) * db) % 2 else 1), b, lap(a, c), ())
    accumulate(1, (), lap(a), b + c)
    accumulate(sa, a, lap(b), c)
    accumulate(-1 if (da + db) % 2 else 1, a + b, lap(c), ())
    return result


class SymComplex:
    """
    (Sym^{<= sym_cut}(F)[hbar]/hbar^{hbar_cut+1}, Q + hbar Delta_B) for a generator complex F.

    pairing is a degree +1 graded-symmetric form on F (the shift of a degree -1 antisymmetric field
    pairing). With hbar_value set, hbar is specialized to that number and no hbar powers are kept.
    """

    def __init__(self, base: CochainComplex, pairing: Optional[ShiftedPairing], sym_cut: int,
                 hbar_cut: int = 0, hbar_value: Optional[Fraction] = None, name: str = '',
                 check: bool = True):
        self.base = base
        self.pairing = pairing
        self.hbar_value = None if hbar_value is None else Fraction(hbar_value)
        if self.hbar_value is not None:
            hbar_cut = 0
        self.algebra = SymAlgebra(base.space.degree_list, sym_cut, hbar_cut)
        self.name = name or f"Sym({base.name})"
        if pairing is not None:
            if pairing.space != base.space:
                raise DegreeError("Pairing does not live on the generator space")
            if pairing.degree != 1:
                raise DegreeError(f"BV pairing on generators must have degree +1, got {pairing.degree}")
            if pairing.symmetry != 1:
                raise DegreeError("BV pairing on generators must be graded symmetric")
            if not pairing_invariance_defect(base, pairing).is_zero():
                raise NotAComplexError(f"Differential of {base.name} is not a derivation for the pairing")

        monos = self.algebra.monomials()
        keys = [(m, h) for m in monos for h in range(hbar_cut + 1)]
        keys.sort(key=lambda key: (self.algebra.degree(key[0]), key[1], len(key[0]), key[0]))
        self.keys: List[Key] = keys
        self.index: Dict[Key, int] = {key: n for n, key in enumerate(keys)}
        self.space = GradedVectorSpace.from_degree_list(
            [self.algebra.degree(m) for m, _ in keys], [self._label(key) for key in keys])
        self.q_matrix, self.delta_matrix = self._build_matrices()
        differential = self.q_matrix + self.delta_matrix
        self.complex = CochainComplex(self.space, differential, name=self.name, check=False)
        if check and not (differential @ differential).is_zero():
            raise NotAComplexError(f"(Q + hbar Delta)^2 != 0 on {self.name}")
        logger.debug(f"Built {self.name}: {len(keys)} basis elements, degrees {self.space.dims}")

    def _label(self, key: Key) -> str:
        mono, h = key
        labels = self.base.space.flat_labels()
        body = '·'.join(labels[g] for g in mono) or '1'
        return f"ħ^{h} {body}" if h else body

    def _build_matrices(self) -> Tuple[RationalMatrix, RationalMatrix]:
        n = len(self.keys)
        columns = self.base.differential.columns()
        q_entries = []
        delta_entries = []
        gram = self.pairing.gram if self.pairing is not None else None
        factor = self.hbar_value
        for col, (mono, h) in enumerate(self.keys):
            for new_mono, value in self.algebra.derivation(columns, mono).items():
                q_entries.append((self.index[(new_mono, h)], col, value))
            if gram is None or gram.is_zero():
                continue
            if factor is None:
                if h + 1 > self.algebra.hbar_cut:
                    continue
                target_h, scale = h + 1, Fraction(1)
            else:
                target_h, scale = 0, factor
            for new_mono, value in self.algebra.laplacian(gram, mono).items():
                delta_entries.append((self.index[(new_mono, target_h)], col, scale * value))
        return (RationalMatrix.from_entries(n, n, q_entries),
                RationalMatrix.from_entries(n, n, delta_entries))

    @property
    def dim(self) -> int:
        return len(self.keys)

    def vector(self, element: SymElement) -> Vector:
        result: Vector = {}
        for key, value in element.terms.items():
            if key not in self.index:
                raise TruncationError(f"Term {key} lies outside the truncation of {self.name}")
            result[self.index[key]] = value
        return result

    def element(self, vector: Vector) -> SymElement:
        return SymElement({self.keys[i]: v for i, v in vector.items()})

    def apply_differential(self, element: SymElement) -> SymElement:
        return self.element(self.complex.differential.apply(self.vector(element)))

    def identities(self) -> Dict[str, bool]:
        """The square-zero identities of the classical and quantum parts."""
        q, delta = self.q_matrix, self.delta_matrix
        total = q + delta
        return {
            'Q^2 = 0': (q @ q).is_zero(),
            'Delta^2 = 0': (delta @ delta).is_zero(),
            'Q Delta + Delta Q = 0': ((q @ delta) + (delta @ q)).is_zero(),
            '(Q + hbar Delta)^2 = 0': (total @ total).is_zero(),
        }

    def sym_degree_indices(self, sym_degree: int, hbar_power: Optional[int] = None) -> List[int]:
        return [n for n, (m, h) in enumerate(self.keys)
                if len(m) == sym_degree and (hbar_power is None or h == hbar_power)]


def sym_observables(base: CochainComplex, pairing: Optional[ShiftedPairing], sym_cut: int,
                    hbar_cut: int = 0, name: str = '') -> SymComplex:
    """Truncated observables Sym(F)[hbar] with Q + hbar Delta_B (Delta omitted without a pairing)."""
    return SymComplex(base, pairing, sym_cut, hbar_cut, name=name)


def twisted_envelope(base: CochainComplex, cocycle: ShiftedPairing, sym_cut: int, hbar_cut: int = 0,
                     name: str = '') -> SymComplex:
    """
    The hbar-twisted enveloping complex (Sym(F)[hbar], Q_F + hbar Delta_mu) of a degree +1 cocycle mu.

    Raises:
        NotAComplexError: if mu is not a cocycle for the differential of F
    """
    if cocycle.space != base.space:
        raise DegreeError("Cocycle does not live on the generator space")
    if not pairing_invariance_defect(base, cocycle).is_zero():
        raise NotAComplexError(f"Twisting form {cocycle.name} is not a cocycle for {base.name}")
    return SymComplex(base, None if cocycle.is_zero() else cocycle, sym_cut, hbar_cut,
                      name=name or f"U_μ({base.name})")


def specialize_hbar(sym: SymComplex, value=1) -> SymComplex:
    """The same observables with hbar set to a number."""
    return SymComplex(sym.base, sym.pairing, sym.algebra.sym_cut, hbar_value=Fraction(value),
                      name=f"{sym.name}|ħ={value}")


def sym_map(linear: RationalMatrix, source: SymComplex, target: SymComplex, check: bool = True,
            name: str = '') -> ChainMap:
    """
    The algebra map Sym(f) induced by a degree-0 linear map of generators, hbar-linearly.

    Raises:
        NotAComplexError: if the result does not commute with both differentials
    """
    if linear.shape != (target.base.dim, source.base.dim):
        raise DegreeError(f"Linear map has shape {linear.shape}, expected {(target.base.dim, source.base.dim)}")
    columns = linear.columns()
    entries = []
    for col, (mono, h) in enumerate(source.keys):
        if h > target.algebra.hbar_cut:
            raise TruncationError(f"hbar power {h} exceeds the target cutoff")
        image = target.algebra.expand_product([columns[g] for g in mono])
        for new_mono, value in image.items():
            key = (new_mono, h)
            if key not in target.index:
                raise TruncationError(f"Image monomial of Sym-degree {len(new_mono)} exceeds the target cutoff")
            entries.append((target.index[key], col, value))
    matrix = RationalMatrix.from_entries(target.dim, source.dim, entries)
    return ChainMap(source.complex, target.complex, matrix, name=name or 'Sym(f)', check=check)


# --- retractions on observables ---

@dataclass
class SymRetraction:
    big: SymComplex
    small: SymComplex
    retraction: DeformationRetraction


def _sym_homotopy(algebra: SymAlgebra, mono: Monomial, pi_cols, kappa_cols, k_cols) -> Dict[Monomial, Fraction]:
    """
    K(g_1...g_n) = sum_j (-1)^{|g_1|+...+|g_{j-1}|} sum_{A subset of [n]-{j}} 1/(n-|A|)
    prod_{i != j} (pi if i in A else kappa)(g_i), with k applied to g_j in place.
    """
    n = len(mono)
    result: Dict[Monomial, Fraction] = {}
    prefix = 0
    for j in range(n):
        sign = -1 if prefix % 2 else 1
        others = [i for i in range(n) if i != j]
        for size in range(len(others) + 1):
            weight = Fraction(sign, n - size)
            for chosen in combinations(others, size):
                chosen_set = set(chosen)
                factors = []
                for i in range(n):
                    if i == j:
                        factors.append(k_cols[mono[i]])
                    elif i in chosen_set:
                        factors.append(pi_cols[mono[i]])
                    else:
                        factors.append(kappa_cols[mono[i]])
                for new_mono, value in algebra.expand_product(factors).items():
                    total = result.get(new_mono, 0) + weight * value
                    if total:
                        result[new_mono] = total
                    else:
                        result.pop(new_mono, None)
        prefix += algebra.degrees[mono[j]]
    return result


def sym_retraction(linear: DeformationRetraction, sym_cut: int, hbar_cut: int = 0,
                   check: bool = True) -> SymRetraction:
    """
    Extend a linear deformation retraction to the truncated classical observables.

    Inclusion and projection are the algebra maps Sym(i), Sym(p); the homotopy is the symmetrized
    extension of k, which keeps all side conditions.
    """
    big = SymComplex(linear.big, None, sym_cut, hbar_cut, name=f"Sym({linear.big.name})")
    small = SymComplex(linear.small, None, sym_cut, hbar_cut, name=f"Sym({linear.small.name})")
    inclusion = sym_map(linear.inclusion, small, big, check=False).matrix
    projection = sym_map(linear.projection, big, small, check=False).matrix
    n = linear.big.dim
    pi = linear.inclusion @ linear.projection
    kappa = RationalMatrix.identity(n) - pi
    pi_cols, kappa_cols, k_cols = pi.columns(), kappa.columns(), linear.homotopy.columns()
    entries = []
    cache: Dict[Monomial, Dict[Monomial, Fraction]] = {}
    for col, (mono, h) in enumerate(big.keys):
        if mono not in cache:
            cache[mono] = _sym_homotopy(big.algebra, mono, pi_cols, kappa_cols, k_cols)
        for new_mono, value in cache[mono].items():
            entries.append((big.index[(new_mono, h)], col, value))
    homotopy = RationalMatrix.from_entries(big.dim, big.dim, entries)
    retraction = DeformationRetraction(big.complex, small.complex, inclusion, projection, homotopy,
                                       name=f"Sym({linear.name})", check=check)
    if check:
        status = retraction.check()
        if not status.all_hold:
            raise NotAComplexError(f"Sym retraction fails: {', '.join(status.failed())}")
    return SymRetraction(big, small, retraction)


@dataclass
class QuantumRetraction:
    classical: SymRetraction
    quantum_big: SymComplex
    perturbed: DeformationRetraction

    @property
    def induced_differential(self) -> RationalMatrix:
        return self.perturbed.small.differential


def quantum_retraction(classical: SymRetraction, pairing: ShiftedPairing) -> QuantumRetraction:
    """Perturb a Sym retraction by hbar Delta; the series stops after hbar_cut + 1 terms."""
    hbar_cut = classical.big.algebra.hbar_cut
    quantum = SymComplex(classical.big.base, pairing, classical.big.algebra.sym_cut, hbar_cut,
                         name=f"{classical.big.name}_q")
    perturbed = hpl(classical.retraction, quantum.delta_matrix, iteration_bound=hbar_cut + 1,
                    name=f"{classical.retraction.name}^q")
    return QuantumRetraction(classical, quantum, perturbed)


# --- finite BV cohomology ---

@dataclass
class FiniteBVResult:
    rank: int
    degree: Optional[int]
    piece_dims: Dict[int, Dict[int, int]] = field(default_factory=dict)
    closed_form: Tuple[int, int] = (1, 0)
    stabilized: bool = True

    @property
    def agrees(self) -> bool:
        return self.stabilized and (self.rank, self.degree) == self.closed_form


def _check_two_degree_pairing(pairing: ShiftedPairing) -> Tuple[List[int], List[int]]:
    space = pairing.space
    if set(space.dims) - {-1, 0}:
        raise DegreeError(f"Generators must sit in degrees -1 and 0, got {sorted(space.dims)}")
    if pairing.degree != 1 or pairing.symmetry != 1:
        raise DegreeError("Finite BV pairing must be degree +1 and graded symmetric")
    if space.dim(-1) != space.dim(0) or not pairing.is_nondegenerate():
        raise ModelError(f"Degenerate BV pairing on dims {space.dims}")
    return space.indices(-1), space.indices(0)


def balanced_monomials(odd: List[int], even: List[int], balance: int) -> List[Monomial]:
    """Monomials with (#even factors) - (#odd factors) = balance."""
    result = []
    for b in range(len(odd) + 1):
        a = balance + b
        if a < 0:
            continue
        for odd_part in combinations(odd, b):
            for even_part in combinations_with_replacement(even, a):
                result.append(tuple(sorted(odd_part + even_part)))
    return result


def finite_bv_cohomology(pairing: ShiftedPairing, window: int = 2) -> FiniteBVResult:
    """
    Cohomology of (Sym(W), Delta) at hbar = 1 for generators W in degrees -1 (odd) and 0 (even) with a
    perfect degree +1 pairing.

    Delta removes one odd and one even factor, so the complex splits into finite pieces indexed by
    (#even - #odd) >= -k with k = dim W^{-1}; each piece is computed exactly. Pieces -k ... -k + window
    are computed and the closed form (rank 1 in degree -k) is compared against them.

    Raises:
        ModelError: if the pairing is degenerate
    """
    odd, even = _check_two_degree_pairing(pairing)
    k = len(odd)
    algebra = SymAlgebra(pairing.space.degree_list, sym_cut=k + window)
    gram = pairing.gram
    piece_dims: Dict[int, Dict[int, int]] = {}
    for balance in range(-k, -k + window + 1):
        monos = balanced_monomials(odd, even, balance)
        monos.sort(key=lambda m: (algebra.degree(m), m))
        index = {m: n for n, m in enumerate(monos)}
        entries = []
        for col, mono in enumerate(monos):
            for new_mono, value in algebra.laplacian(gram, mono).items():
                entries.append((index[new_mono], col, value))
        space = GradedVectorSpace.from_degree_list([algebra.degree(m) for m in monos])
        piece = CochainComplex(space, RationalMatrix.from_entries(len(monos), len(monos), entries),
                               name=f"piece {balance}")
        piece_dims[balance] = {d: v for d, v in cohomology_dims(piece).items() if v}
        logger.debug(f"Finite BV piece {balance}: {len(monos)} monomials, H = {piece_dims[balance]}")
    total = sum(sum(d.values()) for d in piece_dims.values())
    degrees = sorted({d for dims in piece_dims.values() for d in dims})
    stabilized = all(not piece_dims[b] for b in piece_dims if b > -k)
    degree = degrees[0] if len(degrees) == 1 else None
    return FiniteBVResult(total, degree, piece_dims, closed_form=(1, -k), stabilized=stabilized)


def finite_bv_truncated(pairing: ShiftedPairing, sym_cut: int) -> Dict[int, int]:
    """
    Brute-force oracle: cohomology of the hbar = 1 complex on Sym^{<= sym_cut}(W), restricted to the
    pieces that fit entirely below the cutoff.
    """
    odd, even = _check_two_degree_pairing(pairing)
    k = len(odd)
    generators = CochainComplex(pairing.space, name='W')
    sym = SymComplex(generators, pairing, sym_cut, hbar_value=1, name='Sym(W)|ħ=1')
    odd_set = set(odd)
    complete = [n for n, (m, _) in enumerate(sym.keys)
                if (len(m) - 2 * sum(1 for g in m if g in odd_set)) + 2 * k <= sym_cut]
    restricted = sym.complex.restrict(complete, name='complete pieces')
    return {d: v for d, v in cohomology_dims(restricted).items() if v}


def sym_dimension(n_even: int, n_odd: int, degree_cut: int) -> int:
    """dim Sym^{<= degree_cut} of n_even even and n_odd odd generators."""
    total = 0
    for length in range(degree_cut + 1):
        for b in range(min(length, n_odd) + 1):
            a = length - b
            total += comb(n_odd, b) * (comb(n_even + a - 1, a) if n_even else int(a == 0))
    return total

