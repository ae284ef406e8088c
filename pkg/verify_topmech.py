# verify_topmech.py

"""
Topological mechanics on an interval: the open interval's observables quantize to the Weyl algebra
and the half-closed interval's observables form its Fock module.
"""

import logging
import sys
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence

from utils.algebras import WeylAlgebra, fock_action
from utils.bv_engine import SymElement, quantum_retraction, sym_dimension, sym_map, sym_observables, sym_retraction
from utils.field_models import (
    CellularInterval, Region, bulk_fields, bump_cochains, conditioned_fields, correspondence_maps,
    extension_by_zero, generator_data, green_defect, lagrangian_check, observables, quantum_cocycle_check,
    quantum_inclusion, structure_map, telescoping_form, topological_mechanics_model
)
from utils.graded_core import GradedAlgebraError, cohomology_dims, express_modulo_boundaries, shift_retraction
from utils.linear_algebra import RationalMatrix
from utils.report_handler import VerificationReport, load_config, print_summary, setup_logging, write_report

logger = logging.getLogger('BVFactorize.topmech')

LEMMA = 'topmech'

GRID_DIMS = (2, 4)
GRID_CELLS = (3, 4, 5)
GRID_SYM_CUT = 2
GRID_HBAR_CUT = 1


def _nonzero(dims: Dict[int, int]) -> Dict[int, int]:
    return {k: v for k, v in dims.items() if v}


def check_green_form(report: VerificationReport, model, cells: int) -> None:
    full = bulk_fields(model, CellularInterval(cells, Region(0, cells, 'cc')))
    report.add_check('Green form equals the boundary telescoping form',
                     green_defect(full).gram == telescoping_form(model, full), True, 'PAPER')
    half = conditioned_fields(model, CellularInterval(cells, Region(0, cells, 'co')))
    report.add_check('pairing is invariant on conditioned fields', green_defect(half).is_zero(), True, 'PAPER')


def check_correspondence(report: VerificationReport, model, cells: int) -> None:
    interval = CellularInterval(cells, Region(0, cells, 'co'))
    for label, phi in zip(('first edge', 'last edge', 'uniform'), bump_cochains(interval)):
        corr = correspondence_maps(model, interval, phi)
        status = corr.retraction.check()
        report.add_check(f"P I = 1, I P - 1 = QK + KQ and side conditions ({label} φ)",
                         status.failed(), [], 'PAPER')
        report.add_check(f"ρ I lands in L ({label} φ)", _restriction_in_lagrangian(corr), True, 'PAPER')
        cocycle = quantum_cocycle_check(model, corr)
        report.add_check(f"<I a, I b> = 2 W(φ, Ψ) μ(a, b) ({label} φ)", cocycle.holds, True, 'DERIVED')
        report.add_check(f"W(φ, Ψ) ({label} φ)", cocycle.whitney_value, Fraction(-1, 2), 'DERIVED')


def _restriction_in_lagrangian(corr) -> bool:
    complement = set(corr.complement)
    inclusion = corr.inclusion
    for n, (cell, x) in enumerate(corr.fields.basis):
        if cell == ('v', 0) and x in complement and inclusion.row(n):
            return False
    return True


def check_weyl_dims(report: VerificationReport, model, cells: int, sym_cut: int, hbar_cut: int) -> None:
    fields = conditioned_fields(model, CellularInterval(cells, Region(0, cells, 'oo')))
    report.add_check('H of open-interval fields is E_∂ in degree 1', _nonzero(cohomology_dims(fields.complex)),
                     _nonzero({1: model.dim}), 'PAPER')
    obs = observables(fields, sym_cut, hbar_cut)
    report.add_check('(Q + ħΔ)^2 = 0 and companions on Obs(open)', obs.identities(),
                     {k: True for k in obs.identities()}, 'TRIVIAL')
    expected = _nonzero({0: (hbar_cut + 1) * sym_dimension(model.dim, 0, sym_cut)})
    report.add_check('H(Obs(open)) matches W(V) graded dims', _nonzero(cohomology_dims(obs.complex)), expected,
                     'PAPER')


def check_commutator(report: VerificationReport, model, cells: int, sym_cut: int, hbar_cut: int,
                     generators: Optional[Sequence[int]] = None) -> None:
    """[m(v ⊗ w)] - [m(w ⊗ v)] = ħ ω(v, w) for degree-0 v on the left and w on the right interval."""
    generators = list(range(model.dim)) if generators is None else list(generators)
    cut = cells // 2
    left = CellularInterval(cells, Region(0, cut, 'oo'))
    right = CellularInterval(cells, Region(cut, cells, 'oo'))
    target = CellularInterval(cells, Region(0, cells, 'oo'))
    smap = structure_map(model, [left, right], target, sym_cut, hbar_cut)
    phi_left = {('e', j): Fraction(1, len(left.edges)) for j in left.edges}
    phi_right = {('e', j): Fraction(1, len(right.edges)) for j in right.edges}
    obs = smap.target_observables
    unit = obs.vector(SymElement({((), 1): Fraction(1)}))
    omega = model.pairing.gram
    computed, expected = {}, {}
    for v in generators:
        for w in generators:
            ordered = smap.product([smap.generator(0, phi_left, {v: 1}), smap.generator(1, phi_right, {w: 1})])
            reversed_ = smap.product([smap.generator(0, phi_left, {w: 1}), smap.generator(1, phi_right, {v: 1})])
            image = obs.vector(smap.apply(ordered - reversed_))
            coefficient = express_modulo_boundaries(obs.complex, image, [unit], 0)
            computed[(v, w)] = None if coefficient is None else coefficient[0]
            expected[(v, w)] = omega[v, w]
    report.add_check('ordered commutator equals ħ ω(v, w)', computed, expected, 'PAPER')


def check_projection(report: VerificationReport, model, cells: int, sym_cut: int) -> None:
    """P ∘ ext ∘ I from an open interval into [0, N) is the projection V -> V/L."""
    cut = cells // 2
    inner = CellularInterval(cells, Region(cut, cells, 'oo'))
    outer = CellularInterval(cells, Region(0, cells, 'co'))
    inner_corr = correspondence_maps(model, inner, [1] + [0] * (len(inner.edges) - 1))
    outer_corr = correspondence_maps(model, outer, [1] + [0] * (cells - 1))
    composite = outer_corr.retraction.projection @ extension_by_zero(inner_corr.fields, outer_corr.fields) \
        @ inner_corr.inclusion
    projection = RationalMatrix.from_entries(len(outer_corr.complement), model.dim,
                                             [(c, x, 1) for c, x in enumerate(outer_corr.complement)])
    report.add_check('P ∘ m ∘ I is the projection V -> V/L', composite == projection, True, 'PAPER')
    source = sym_observables(inner_corr.small, None, sym_cut, name='Sym(V)')
    target = sym_observables(outer_corr.small, None, sym_cut, name='Sym(V/L)')
    report.add_check('Sym(P ∘ m ∘ I) equals Sym of the projection',
                     sym_map(composite, source, target).matrix == sym_map(projection, source, target).matrix,
                     True, 'DERIVED')


def check_fock_module(report: VerificationReport, model, cells: int, sym_cut: int, hbar_cut: int) -> None:
    """m(I f ⊗ a) is cohomologous to I(f · a) for Fock elements f and generators a."""
    n = model.dim // 2
    cut = cells // 2
    left = CellularInterval(cells, Region(0, cut, 'co'))
    right = CellularInterval(cells, Region(cut, cells, 'oo'))
    target = CellularInterval(cells, Region(0, cells, 'co'))
    smap = structure_map(model, [left, right], target, sym_cut, hbar_cut)
    corr = correspondence_maps(model, target, [1] + [0] * (cells - 1))
    inclusion = quantum_inclusion(model, corr, sym_cut, hbar_cut)
    report.add_check('Sym(I) intertwines the twisted envelope with Obs([0, N))', inclusion.chain_map.is_chain_map(),
                     True, 'PAPER')
    weyl = WeylAlgebra(model.pairing.gram, model.lagrangian)
    fock = weyl.fock_space()
    obs = smap.target_observables
    first_edge = {('e', 0): Fraction(1)}
    last_edge = {('e', cells - 1): Fraction(1)}
    fock_elements = [((), fock.vacuum())]
    fock_elements += [((j,), fock.generator(j)) for j in range(n)]
    if sym_cut >= 3:
        fock_elements += [((j, k), fock.generator(j) * fock.generator(k)) for j in range(n) for k in range(j, n)]
    mismatches = []
    for positions, f in fock_elements:
        for a in range(model.dim):
            factors = [smap.generator(0, first_edge, {corr.complement[j]: 1}) for j in positions]
            factors.append(smap.generator(1, last_edge, {a: 1}))
            image = obs.vector(smap.apply(smap.product(factors)))
            expected = fock_action(f, weyl.generator(a))
            element = SymElement()
            for (exps, h), value in expected.terms.items():
                mono = tuple(c for c, e in enumerate(exps) for _ in range(e))
                element.add_term((mono, h), value)
            lifted = obs.vector(inclusion.apply(element))
            difference = dict(image)
            for i, value in lifted.items():
                difference[i] = difference.get(i, 0) - value
            difference = {i: v for i, v in difference.items() if v}
            if difference and express_modulo_boundaries(obs.complex, difference, [], 0) is None:
                mismatches.append([list(positions), a])
    report.add_check('half-closed observables carry the F(L) right action', mismatches, [], 'PAPER')


def check_transfer(report: VerificationReport, model, cells: int, sym_cut: int, hbar_cut: int) -> None:
    """(I, P, K) on [0, N) extended to Sym, then perturbed by ħΔ onto Sym(L⊥)[ħ]."""
    sym_cut = min(sym_cut, 3)
    corr = correspondence_maps(model, CellularInterval(cells, Region(0, cells, 'co')), [1] + [0] * (cells - 1))
    classical = sym_retraction(shift_retraction(corr.retraction, 1), sym_cut, hbar_cut, check=False)
    report.add_check(f"Sym(I, P, K) satisfies the retraction identities at symCut {sym_cut}",
                     classical.retraction.check().failed(), [], 'DERIVED')
    _, pairing = generator_data(corr.fields)
    quantum = quantum_retraction(classical, pairing)
    report.add_check('perturbed (I^q, P^q, K^q) satisfies the retraction identities',
                     quantum.perturbed.check().failed(), [], 'DERIVED')
    report.add_check('transferred boundary differential vanishes', quantum.induced_differential.is_zero(), True,
                     'PAPER')
    expected = _nonzero({0: (hbar_cut + 1) * sym_dimension(len(corr.complement), 0, sym_cut)})
    report.add_check('H(Obs([0, N))) matches F(L)[ħ] graded dims',
                     _nonzero(cohomology_dims(quantum.quantum_big.complex)), expected, 'PAPER')

def check_grid(report: VerificationReport) -> None:
    """Green form, correspondence, Weyl dims and projection over dim V x cells at small cutoffs."""
    failures = []
    for dim_v in GRID_DIMS:
        model = topological_mechanics_model(dim_v // 2)
        for cells in GRID_CELLS:
            scratch = VerificationReport(LEMMA, {'dimV': dim_v, 'cells': cells})
            check_green_form(scratch, model, cells)
            check_correspondence(scratch, model, cells)
            check_weyl_dims(scratch, model, cells, GRID_SYM_CUT, GRID_HBAR_CUT)
            check_projection(scratch, model, cells, GRID_SYM_CUT)
            failures += [[dim_v, cells, name] for name in scratch.failed_checks()]
    report.add_check(f"interval identities hold for dim V in {list(GRID_DIMS)}, cells in {list(GRID_CELLS)}",
                     failures, [], 'DERIVED')



def run_topmech(config: Dict[str, Any]) -> VerificationReport:
    """
    Raises:
        ValueError: if dimV is odd
    """
    dim_v, cells = config['dimV'], config['cells']
    sym_cut, hbar_cut = config['symCut'], config['hbarCut']
    if dim_v % 2:
        raise ValueError(f"Topological mechanics needs an even dim V, got {dim_v}")
    report = VerificationReport(LEMMA, {'dimV': dim_v, 'cells': cells, 'symCut': sym_cut, 'hbarCut': hbar_cut})
    model = topological_mechanics_model(dim_v // 2)
    verdict = lagrangian_check(model.boundary, model.pairing, model.lagrangian)
    report.add_check('L = span(q) is a Lagrangian subcomplex', verdict.all_hold, True, 'TRIVIAL')
    check_green_form(report, model, cells)
    if dim_v == 0:
        return report
    check_correspondence(report, model, cells)
    check_weyl_dims(report, model, cells, sym_cut, hbar_cut)
    if sym_cut >= 2 and hbar_cut >= 1:
        check_commutator(report, model, cells, sym_cut, hbar_cut)
        check_fock_module(report, model, cells, sym_cut, hbar_cut)
        check_transfer(report, model, cells, sym_cut, hbar_cut)
    else:
        logger.warning("symCut < 2 or hbarCut < 1: commutator and Fock checks withheld")
    check_projection(report, model, cells, sym_cut)
    check_grid(report)
    return report


if __name__ == "__main__":
    setup_logging()
    try:
        result = run_topmech(load_config()).finish()
    except GradedAlgebraError as e:
        logger.error(f"Verification error: {e}")
        sys.exit(1)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(2)
    write_report(result)
    print_summary(result)
    sys.exit(0 if result.passed else 1)
