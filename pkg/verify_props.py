# verify_props.py

"""
Invariant suites shared by every model: square-zero identities, the second-order property of Δ, the
Green form on the full interval, linear cosheaf exactness, Künneth, the Riemannian toy condition and
the finite BV closed form.
"""

import itertools
import logging
import sys
from fractions import Fraction
from typing import Any, Dict, List

from utils.bv_engine import (
    SymAlgebra, finite_bv_cohomology, finite_bv_truncated, laplacian_orderings_agree, seven_term_defect
)
from utils.field_models import (
    CellularInterval, Region, SpectralSurface, bulk_fields, cellular_de_rham, conditioned_fields,
    cosheaf_sequence, generator_data, green_defect, koszul_strip_model, lagrangian_check, observables,
    riemannian_condition_model, riemannian_toy, spectral_dolbeault, telescoping_form,
    topological_mechanics_model
)
from utils.graded_core import (
    CochainComplex, GradedAlgebraError, GradedVectorSpace, ShiftedPairing, acyclic_contraction, cohomology_dims,
    dual, hpl, kunneth, shift, tensor
)
from utils.linear_algebra import RationalMatrix
from utils.report_handler import VerificationReport, load_config, print_summary, setup_logging, write_report
from utils.topology import surface_hodge

logger = logging.getLogger('BVFactorize.props')

LEMMA = 'props'

STRUCTURE_CELLS = 2
GREEN_CELLS = 8
GREEN_DIMS = (2, 4)
COSHEAF_CELLS = 6
FINITE_BV_DIMS = (1, 2, 3)
SEVEN_TERM_GENERATORS = 5


def _nonzero(dims: Dict[int, int]) -> Dict[int, int]:
    return {k: v for k, v in dims.items() if v}


def structure_models() -> List:
    return [topological_mechanics_model(1), koszul_strip_model(1), surface_hodge(1),
            spectral_dolbeault(SpectralSurface(0))]


def check_square_zero(report: VerificationReport, sym_cut: int, hbar_cut: int) -> None:
    failures = []
    for model in structure_models():
        kinds = ['oo', 'co'] + (['cc'] if model.far_lagrangian is not None else [])
        for kind in kinds:
            fields = conditioned_fields(model, CellularInterval(STRUCTURE_CELLS, Region(0, STRUCTURE_CELLS, kind)))
            if not (fields.complex.differential @ fields.complex.differential).is_zero():
                failures.append(f"{model.name} {kind}: d^2")
            obs = observables(fields, sym_cut, hbar_cut)
            failures += [f"{model.name} {kind}: {name}" for name, ok in obs.identities().items() if not ok]
    report.add_check('d^2 = 0, Δ^2 = 0, QΔ + ΔQ = 0 and (Q + ħΔ)^2 = 0 on every model', failures, [],
                     'TRIVIAL')


def check_second_order(report: VerificationReport) -> None:
    """The seven-term identity and the ordering independence of the recursive Laplacian."""
    defects, disagreements = [], []
    for model in (topological_mechanics_model(1), surface_hodge(1)):
        fields = conditioned_fields(model, CellularInterval(STRUCTURE_CELLS, Region(0, STRUCTURE_CELLS, 'oo')))
        generators, pairing = generator_data(fields)
        algebra = SymAlgebra(generators.space.degree_list, 3)
        gram = pairing.gram
        chosen = range(min(SEVEN_TERM_GENERATORS, generators.dim))
        for a, b, c in itertools.product(chosen, repeat=3):
            if seven_term_defect(algebra, gram, (a,), (b,), (c,)):
                defects.append([model.name, a, b, c])
        for mono in algebra.monomials():
            if set(mono) <= set(chosen) and not laplacian_orderings_agree(algebra, gram, mono):
                disagreements.append([model.name, list(mono)])
    report.add_check('Δ is second order on generator triples', defects, [], 'DERIVED')
    report.add_check('recursive Δ is independent of the factor ordering', disagreements, [], 'TRIVIAL')


def check_green_grid(report: VerificationReport) -> None:
    failures = []
    for dim_v in GREEN_DIMS:
        model = topological_mechanics_model(dim_v // 2)
        for cells in range(1, GREEN_CELLS + 1):
            full = bulk_fields(model, CellularInterval(cells, Region(0, cells, 'cc')))
            if green_defect(full).gram != telescoping_form(model, full):
                failures.append(['telescoping', dim_v, cells])
            half = conditioned_fields(model, CellularInterval(cells, Region(0, cells, 'co')))
            if not green_defect(half).is_zero():
                failures.append(['conditioned', dim_v, cells])
    report.add_check(f"Green form equals the telescoping form for N <= {GREEN_CELLS}", failures, [], 'PAPER')


def cosheaf_covers(cells: int) -> List:
    """Overlapping pairs (a, c) and (b, d) with a < b < c < d, closed at the ambient ends."""
    covers = []
    for a, b, c, d in itertools.combinations(range(cells + 1), 4):
        first = Region(a, c, ('c' if a == 0 else 'o') + 'o')
        second = Region(b, d, 'o' + ('c' if d == cells else 'o'))
        covers.append((CellularInterval(cells, first), CellularInterval(cells, second)))
    return covers


def check_cosheaf(report: VerificationReport) -> None:
    model = topological_mechanics_model(1)
    failures = []
    for cells in range(3, COSHEAF_CELLS + 1):
        for first, second in cosheaf_covers(cells):
            if not cosheaf_sequence(model, first, second).all_exact:
                failures.append([first.describe(), second.describe()])
    report.add_check(f"Mayer-Vietoris sequences of conditioned fields are exact for N <= {COSHEAF_CELLS}",
                     failures, [], 'PAPER')


def check_homological_algebra(report: VerificationReport) -> None:
    identity = CochainComplex.from_blocks({0: 1, 1: 1}, {0: RationalMatrix.identity(1)}, name='Q -> Q')
    zero = CochainComplex.from_blocks({0: 1, 1: 1}, {0: RationalMatrix.zeros(1, 1)}, name='Q 0 Q')
    report.add_check('Q --id--> Q is acyclic', _nonzero(cohomology_dims(identity)), {}, 'TRIVIAL')
    report.add_check('Q --0--> Q has H = Q in both degrees', _nonzero(cohomology_dims(zero)), {0: 1, 1: 1},
                     'TRIVIAL')
    report.add_check('open interval with 3 cells has H^1 = Q',
                     _nonzero(cohomology_dims(cellular_de_rham(3, Region(0, 3, 'oo')))), {1: 1}, 'DERIVED')
    report.add_check('tensor of acyclic complexes is acyclic', _nonzero(cohomology_dims(tensor(identity, identity))),
                     {}, 'TRIVIAL')
    first = cellular_de_rham(3, Region(0, 3, 'oo'))
    second = cellular_de_rham(2, Region(0, 2, 'cc'))
    report.add_check('H(C1 ⊗ C2) is the Künneth product', _nonzero(cohomology_dims(tensor(first, second))),
                     kunneth(cohomology_dims(first), cohomology_dims(second)), 'DERIVED')
    report.add_check('shift by 0 is the identity', shift(first, 0).differential == first.differential, True,
                     'TRIVIAL')
    report.add_check('dual(dual(C)) = C', dual(dual(first)).differential == first.differential, True, 'DERIVED')
    contraction = acyclic_contraction(identity)
    report.add_check('hpl with δ = 0 returns the retraction', hpl(contraction, RationalMatrix.zeros(2, 2))
                     is contraction, True, 'TRIVIAL')


def check_riemannian(report: VerificationReport) -> None:
    complex_, pairing, plus, minus = riemannian_toy()
    condition = riemannian_condition_model(complex_, pairing, 1, plus, minus)
    report.add_check('Ω^1_+ ⊕ Ω^2 is a Lagrangian', condition.check.all_hold, True, 'PAPER')
    report.add_check('d_- is d followed by the projection onto Ω^1_-', condition.d_minus,
                     RationalMatrix.from_dense([[Fraction(1, 2)], [Fraction(-1, 2)]]), 'DERIVED')
    everything = RationalMatrix.from_columns(4, [{1: Fraction(1)}, {2: Fraction(1)}, {3: Fraction(1)}])
    report.add_check('taking all of Ω^1 fails the half-rank check',
                     lagrangian_check(complex_, pairing, everything).half_rank, False, 'TRIVIAL')


def finite_bv_pairing(k: int) -> ShiftedPairing:
    """k odd generators in degree -1 paired with k even generators in degree 0."""
    space = GradedVectorSpace({-1: k, 0: k})
    entries = [(i, k + i, Fraction(1)) for i in range(k)] + [(k + i, i, Fraction(1)) for i in range(k)]
    return ShiftedPairing(space, RationalMatrix.from_entries(2 * k, 2 * k, entries), 1, 1, name='W')


def check_finite_bv(report: VerificationReport) -> None:
    closed, truncated = {}, {}
    for k in FINITE_BV_DIMS:
        pairing = finite_bv_pairing(k)
        result = finite_bv_cohomology(pairing)
        closed[k] = [result.rank, result.degree, result.stabilized]
        truncated[k] = finite_bv_truncated(pairing, 2 * k)
        logger.debug(f"Finite BV k={k}: pieces {result.piece_dims}")
    report.add_check('finite BV cohomology has rank 1 in degree -k', closed,
                     {k: [1, -k, True] for k in FINITE_BV_DIMS}, 'DERIVED')
    report.add_check('truncated elimination agrees with the closed form', truncated,
                     {k: {-k: 1} for k in FINITE_BV_DIMS}, 'DERIVED')


def run_props(config: Dict[str, Any]) -> VerificationReport:
    sym_cut, hbar_cut = min(config['symCut'], 2), min(config['hbarCut'], 1)
    if (sym_cut, hbar_cut) != (config['symCut'], config['hbarCut']):
        logger.warning(f"Structural suite runs at symCut {sym_cut}, hbarCut {hbar_cut}")
    report = VerificationReport(LEMMA, {'symCut': sym_cut, 'hbarCut': hbar_cut})
    check_square_zero(report, sym_cut, hbar_cut)
    check_second_order(report)
    check_green_grid(report)
    check_cosheaf(report)
    check_homological_algebra(report)
    check_riemannian(report)
    check_finite_bv(report)
    return report


if __name__ == "__main__":
    setup_logging()
    try:
        result = run_props(load_config()).finish()
    except GradedAlgebraError as e:
        logger.error(f"Verification error: {e}")
        sys.exit(1)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(2)
    write_report(result)
    print_summary(result)
    sys.exit(0 if result.passed else 1)
