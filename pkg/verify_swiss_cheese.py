# verify_swiss_cheese.py

"""
The bulk algebra of the linear Poisson sigma model: the Lichnerowicz complex of polyvector fields with
differential [Π, -], and the canonical complex computing the Hochschild homology of its quantization.
"""

import itertools
import logging
import sys
from typing import Any, Dict, Tuple

from utils.algebras import (
    PolyVector, brylinski_homology, brylinski_window, change_basis, lichnerowicz_cohomology,
    lichnerowicz_expected, poisson_base_complex, random_basis_change, symplectic_block
)
from utils.bv_engine import sym_observables
from utils.graded_core import GradedAlgebraError
from utils.linear_algebra import RationalMatrix, rank
from utils.report_handler import (
    VerificationReport, load_config, load_poisson, print_summary, setup_logging, write_report
)

logger = logging.getLogger('BVFactorize.swiss_cheese')

LEMMA = 'swiss-cheese'

GRID_DIM = 3
GRID_POLY_CUT = 6


def _product(first: Dict[Tuple[int, int], int], second: Dict[Tuple[int, int], int],
             poly_cut: int) -> Dict[Tuple[int, int], int]:
    """Künneth product of bigraded dims, kept in the same reporting window."""
    result: Dict[Tuple[int, int], int] = {}
    for (a1, b1), x in first.items():
        for (a2, b2), y in second.items():
            a, b = a1 + a2, b1 + b2
            if a <= poly_cut - 1 and a + b <= poly_cut:
                result[(a, b)] = result.get((a, b), 0) + x * y
    return result


def check_lichnerowicz(report: VerificationReport, pi: RationalMatrix, poly_cut: int) -> None:
    computed = lichnerowicz_cohomology(pi, poly_cut)
    report.add_check('H(polyvectors, [Π, -]) = Sym(ker Π) ⊗ Λ(coker Π)', computed,
                     lichnerowicz_expected(pi, poly_cut), 'DERIVED')
    report.add_check('symplectic Π on dim 2: H is the constants',
                     lichnerowicz_cohomology(symplectic_block(2), poly_cut), {(0, 0): 1}, 'DERIVED')
    if poly_cut >= 2:
        mixed = lichnerowicz_cohomology(RationalMatrix.from_entries(3, 3, [(0, 1, 1), (1, 0, -1)]), poly_cut)
        kunneth = _product(lichnerowicz_cohomology(symplectic_block(2), poly_cut),
                           lichnerowicz_cohomology(RationalMatrix.zeros(1, 1), poly_cut), poly_cut)
        report.add_check('symplectic pair ⊕ trivial direction is the Künneth product', mixed, kunneth, 'DERIVED')


def check_polyvector_differential(report: VerificationReport, pi: RationalMatrix, poly_cut: int) -> None:
    """[Π, -] on polyvectors agrees with the derivation differential of Sym(V∨ -> V[-1])."""
    n = pi.rows
    sym = sym_observables(poisson_base_complex(pi), None, poly_cut, name='Polyvectors')
    failures = []
    for degree in range(poly_cut + 1):
        for forms_count in range(min(degree, n) + 1):
            for exps in itertools.product(range(degree + 1), repeat=n):
                if sum(exps) != degree - forms_count:
                    continue
                for forms in itertools.combinations(range(n), forms_count):
                    field = PolyVector(n, {(exps, forms): 1})
                    if sym.apply_differential(field.to_sym()) != field.lichnerowicz(pi).to_sym():
                        failures.append([list(exps), list(forms)])
    report.add_check('[Π, -] on x^a ξ_S matches the Sym differential', failures, [], 'TRIVIAL')


def check_brylinski(report: VerificationReport, pi: RationalMatrix, poly_cut: int) -> None:
    n = pi.rows
    homology = brylinski_homology(pi, poly_cut)
    low, high = brylinski_window(pi)
    outside = [degree for degree in homology if not low <= degree <= high]
    report.add_check(f"Hochschild homology lies in degrees {low} .. {high}", outside, [], 'PAPER')
    report.add_check(f"degree -dim V = {-n} is populated", homology.get(-n, 0) > 0, True, 'DERIVED')
    if pi.is_zero():
        report.add_check('Π = 0 populates every degree -dim V .. 0', sorted(homology), list(range(-n, 1)), 'TRIVIAL')
    report.add_check('symplectic Π on dim 2: homology concentrated in degree -2',
                     sorted(brylinski_homology(symplectic_block(2), poly_cut)), [-2], 'DERIVED')


def check_basis_invariance(report: VerificationReport, pi: RationalMatrix, poly_cut: int, seed: int) -> None:
    matrix = random_basis_change(pi.rows, seed=seed)
    moved = change_basis(pi, matrix)
    logger.debug(f"Basis change with seed {seed}: rank Π = {rank(pi)}, rank A Π A^T = {rank(moved)}")
    report.add_check('Lichnerowicz cohomology is invariant under a change of basis',
                     lichnerowicz_cohomology(moved, poly_cut), lichnerowicz_cohomology(pi, poly_cut), 'DERIVED')
    report.add_check('Brylinski homology is invariant under a change of basis',
                     brylinski_homology(moved, poly_cut), brylinski_homology(pi, poly_cut), 'DERIVED')

def _bivector_of_rank(dim: int, rank_: int) -> RationalMatrix:
    entries = []
    for i in range(rank_ // 2):
        entries += [(2 * i, 2 * i + 1, 1), (2 * i + 1, 2 * i, -1)]
    return RationalMatrix.from_entries(dim, dim, entries)


def check_rank_grid(report: VerificationReport, seed: int) -> None:
    """Every rank of Π on dim V <= GRID_DIM, moved off the standard basis, at polyCut GRID_POLY_CUT."""
    lichnerowicz_failures, window_failures = [], []
    for dim in range(1, GRID_DIM + 1):
        matrix = random_basis_change(dim, seed=seed)
        for rank_ in range(0, dim + 1, 2):
            pi = change_basis(_bivector_of_rank(dim, rank_), matrix)
            if lichnerowicz_cohomology(pi, GRID_POLY_CUT) != lichnerowicz_expected(pi, GRID_POLY_CUT):
                lichnerowicz_failures.append([dim, rank_])
            homology = brylinski_homology(pi, GRID_POLY_CUT)
            low, high = brylinski_window(pi)
            if any(not low <= degree <= high for degree in homology) or not homology.get(-dim, 0):
                window_failures.append([dim, rank_])
    report.add_check(f"Lichnerowicz cohomology for every rank of Π, dim V <= {GRID_DIM}, polyCut {GRID_POLY_CUT}",
                     lichnerowicz_failures, [], 'DERIVED')
    report.add_check(f"Hochschild homology window for every rank of Π, dim V <= {GRID_DIM}, "
                     f"polyCut {GRID_POLY_CUT}", window_failures, [], 'PAPER')



def run_swiss_cheese(config: Dict[str, Any]) -> VerificationReport:
    """
    Raises:
        ValueError: if the Poisson bivector is malformed or polyCut < 1
        FileNotFoundError: if a Poisson file is missing
    """
    dim_v, poly_cut, seed = config['dimV'], config['polyCut'], config['seed']
    if poly_cut < 1:
        raise ValueError(f"polyCut must be at least 1, got {poly_cut}")
    pi = load_poisson(config['pi'], dim_v)
    report = VerificationReport(LEMMA, {'dimV': dim_v, 'pi': config['pi'], 'polyCut': poly_cut, 'seed': seed})
    check_lichnerowicz(report, pi, poly_cut)
    check_polyvector_differential(report, pi, poly_cut)
    check_brylinski(report, pi, poly_cut)
    check_basis_invariance(report, pi, poly_cut, seed)
    check_rank_grid(report, seed)
    return report


if __name__ == "__main__":
    setup_logging()
    try:
        result = run_swiss_cheese(load_config()).finish()
    except GradedAlgebraError as e:
        logger.error(f"Verification error: {e}")
        sys.exit(1)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(2)
    write_report(result)
    print_summary(result)
    sys.exit(0 if result.passed else 1)
