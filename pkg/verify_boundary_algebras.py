# verify_boundary_algebras.py

"""
The boundary algebras on their own: the Weyl algebra and its Fock module, the Moyal star product of a
constant Poisson bivector, the symbol map between them, and the exterior algebra that pairs with Sym(V∨).
"""

import itertools
import logging
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List

from utils.algebras import (
    ExteriorElement, FockElement, FockModule, PolyElement, WeylAlgebra, WeylElement, aug_ext, aug_sym,
    fock_action, koszul_pairing, star_product, symbol_map, symplectic_block, weyl_product
)
from utils.graded_core import GradedAlgebraError
from utils.linear_algebra import RationalMatrix
from utils.report_handler import (
    VerificationReport, load_config, load_poisson, print_summary, setup_logging, write_report
)

logger = logging.getLogger('BVFactorize.boundary_algebras')

LEMMA = 'boundary-algebras'

Product = Callable[[WeylElement, WeylElement], WeylElement]


def monomials(n: int, max_degree: int, min_degree: int = 0) -> List[tuple]:
    """Exponent tuples in n variables with total degree in [min_degree, max_degree]."""
    return [exps for exps in itertools.product(range(max_degree + 1), repeat=n)
            if min_degree <= sum(exps) <= max_degree]


def _leading(f: PolyElement) -> Dict:
    return {k: v for k, v in f.terms.items() if k[1] == 0}


# --- Weyl algebra ---

def check_weyl(report: VerificationReport, weyl: WeylAlgebra, product: Product = weyl_product) -> None:
    n = weyl.n
    generators = [weyl.generator(i) for i in range(n)]
    failures = [[v, w] for v in range(n) for w in range(n)
                if product(generators[v], generators[w]) - product(generators[w], generators[v])
                != weyl.constant(weyl.omega[v, w], hbar_power=1)]
    report.add_check('vw - wv = ħ ω(v, w) on generators', failures, [], 'PAPER')

    degree = 2 if n <= 2 else 1
    basis = [weyl.element({(exps, 0): Fraction(1)}) for exps in monomials(n, degree, 1)]
    failures = []
    for a, b, c in itertools.product(basis, repeat=3):
        if product(product(a, b), c) != product(a, product(b, c)):
            failures.append([a.to_json(), b.to_json(), c.to_json()])
    report.add_check(f"(ab)c = a(bc) on monomial triples of degree <= {degree}", failures, [], 'DERIVED')

    failures = [[a.to_json(), b.to_json()] for a, b in itertools.product(basis, repeat=2)
                if product(a, b).specialize_hbar(0) != (a * b).specialize_hbar(0)]
    report.add_check('ħ = 0 specialization is the commutative product', failures, [], 'TRIVIAL')

    flat = WeylAlgebra(RationalMatrix.zeros(n, n), weyl.lagrangian, name='W(V, 0)')
    flat_basis = [flat.element(a.terms) for a in basis]
    failures = [[a.to_json(), b.to_json()] for a, b in itertools.product(flat_basis, repeat=2)
                if product(a, b) != a * b]
    report.add_check('ω = 0 gives the commutative polynomial product', failures, [], 'TRIVIAL')


# --- Fock module ---

def _annihilation(f, weyl: WeylAlgebra, j: int):
    """ħ sum_i ω(p_i, q_j) ∂_i f for the L generator q_j."""
    result = FockElement(f.module)
    for position, i in enumerate(weyl.complement):
        weight = weyl.omega[i, j]
        if weight:
            derivative = f.derivative(position).scale(weight)
            result = result + FockElement(f.module, {(e, h + 1): v for (e, h), v in derivative.terms.items()})
    return result


def check_fock(report: VerificationReport, weyl: WeylAlgebra, max_degree: int,
               product: Product = weyl_product) -> None:
    fock = weyl.fock_space()
    vacuum = fock.vacuum()
    generators = [weyl.generator(i) for i in range(weyl.n)]
    killed = [j for j in weyl.lagrangian if not fock_action(vacuum, generators[j]).is_zero()]
    report.add_check('the vacuum is killed by L', killed, [], 'TRIVIAL')

    elements = [FockElement(fock, {(exps, 0): Fraction(1)}) for exps in monomials(fock.n, 2)]
    failures = []
    for f in elements:
        for a, b in itertools.product(generators, repeat=2):
            if fock_action(fock_action(f, a), b) != fock_action(f, product(a, b)):
                failures.append([f.to_json(), a.to_json(), b.to_json()])
    report.add_check('(f · a) · b = f · (ab) on generator pairs', failures, [], 'DERIVED')

    multiplication = [[f.to_json(), i] for f in elements for position, i in enumerate(weyl.complement)
                      if fock_action(f, generators[i]) != f * fock.generator(position)]
    report.add_check('generators of V/L act by multiplication', multiplication, [], 'PAPER')
    derivation = [[f.to_json(), j] for f in elements for j in weyl.lagrangian
                  if fock_action(f, generators[j]) != _annihilation(f, weyl, j)]
    report.add_check('generators of L act by ħ-derivation', derivation, [], 'PAPER')

    computed, expected = {}, {}
    layer = [vacuum]
    for degree in range(max_degree + 1):
        computed[degree] = len({exps for f in layer for exps, _ in f.terms})
        expected[degree] = FockModule.dimension(fock.n, degree)
        layer = [fock_action(f, generators[i]) for f in layer for i in weyl.complement]
    report.add_check('dim of the degree-d Fock piece equals dim Sym^d(V/L)', computed, expected, 'PAPER')


# --- star product and symbol map ---

def check_star(report: VerificationReport, pi: RationalMatrix) -> None:
    n = pi.rows
    nu = [PolyElement.variable(n, a) for a in range(n)]
    failures = [[a, b] for a in range(n) for b in range(n)
                if star_product(nu[a], nu[b], pi) - star_product(nu[b], nu[a], pi)
                != PolyElement.constant(n, pi[a, b], hbar_power=1)]
    report.add_check('ν_a * ν_b - ν_b * ν_a = ħ Π_ab', failures, [], 'PAPER')

    degree = 2 if n <= 2 else 1
    basis = [PolyElement.monomial(exps) for exps in monomials(n, degree, 1)]
    failures = [[a.to_json(), b.to_json(), c.to_json()] for a, b, c in itertools.product(basis, repeat=3)
                if star_product(star_product(a, b, pi), c, pi) != star_product(a, star_product(b, c, pi), pi)]
    report.add_check(f"star product is associative on monomial triples of degree <= {degree}", failures, [],
                     'DERIVED')

    failures = [[a.to_json(), b.to_json()] for a, b in itertools.product(basis, repeat=2)
                if _leading(star_product(a, b, pi)) != _leading(a * b)]
    report.add_check('the ħ^0 term of f * g is fg', failures, [], 'TRIVIAL')
    zero = RationalMatrix.zeros(n, n)
    failures = [[a.to_json(), b.to_json()] for a, b in itertools.product(basis, repeat=2)
                if star_product(a, b, zero) != a * b]
    report.add_check('Π = 0 gives fg', failures, [], 'TRIVIAL')


def check_symbol_map(report: VerificationReport, weyl: WeylAlgebra) -> None:
    """T(f * g) = T(f) T(g) with the Moyal product of Π = ω and the normal-ordered product."""
    basis = [PolyElement.monomial(exps) for exps in monomials(weyl.n, 2, 1)]
    failures = []
    for f, g in itertools.product(basis, repeat=2):
        left = symbol_map(star_product(f, g, weyl.omega), weyl)
        right = weyl_product(weyl.element(symbol_map(f, weyl).terms), weyl.element(symbol_map(g, weyl).terms))
        if left.terms != right.terms:
            failures.append([f.to_json(), g.to_json()])
    report.add_check('the symbol map intertwines the Moyal and normal-ordered products', failures, [],
                     'DERIVED')


# --- exterior algebra ---

def check_exterior(report: VerificationReport, n: int) -> None:
    generators = [ExteriorElement.generator(n, i) for i in range(n)]
    failures = []
    for i, j in itertools.product(range(n), repeat=2):
        forward, backward = generators[i].wedge(generators[j]), generators[j].wedge(generators[i])
        if forward.terms != {k: -v for k, v in backward.terms.items()}:
            failures.append([i, j])
    report.add_check('e_i ∧ e_j = -e_j ∧ e_i (and e_i ∧ e_i = 0)', failures, [], 'TRIVIAL')
    spanned = set()
    for size in range(n + 1):
        for subset in itertools.combinations(range(n), size):
            product = ExteriorElement.unit(n)
            for i in subset:
                product = product.wedge(generators[i])
            spanned.update(product.terms)
    report.add_check('dim Λ(V) = 2^dim V', len(spanned), ExteriorElement.dimension(n), 'PAPER')
    unit = ExteriorElement.unit(n)
    report.add_check('q(1, 1) = 1', koszul_pairing(PolyElement.constant(n), unit), Fraction(1), 'TRIVIAL')
    constant = PolyElement.constant(n)
    mismatched = [i for i in range(n)
                  if koszul_pairing(constant, generators[i]) != aug_ext(generators[i])
                  or koszul_pairing(PolyElement.variable(n, i), unit) != aug_sym(PolyElement.variable(n, i))]
    report.add_check('q restricts to the augmentations on generators', mismatched, [], 'PAPER')


def run_boundary_algebras(config: Dict[str, Any]) -> VerificationReport:
    """
    Raises:
        ValueError: if the Poisson bivector is malformed
        FileNotFoundError: if a Poisson file is missing
    """
    dim_v, sym_cut = config['dimV'], config['symCut']
    pi = load_poisson(config['pi'], dim_v)
    report = VerificationReport(LEMMA, {'dimV': dim_v, 'pi': config['pi'], 'symCut': sym_cut})
    if dim_v % 2 == 0 and dim_v:
        weyl = WeylAlgebra(symplectic_block(dim_v), [2 * i + 1 for i in range(dim_v // 2)])
        check_weyl(report, weyl)
        check_fock(report, weyl, sym_cut)
        check_symbol_map(report, weyl)
    else:
        logger.warning(f"dim V = {dim_v} carries no symplectic form: Weyl and Fock checks withheld")
    check_star(report, pi)
    check_exterior(report, dim_v)
    return report


if __name__ == "__main__":
    setup_logging()
    try:
        result = run_boundary_algebras(load_config()).finish()
    except GradedAlgebraError as e:
        logger.error(f"Verification error: {e}")
        sys.exit(1)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(2)
    write_report(result)
    print_summary(result)
    sys.exit(0 if result.passed else 1)
