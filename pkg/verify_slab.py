# verify_slab.py

"""
Slab compactification of abelian Chern-Simons theory with chiral and antichiral WZW conditions: the
conditioned fields on [0, N] x Σ are quasi-isomorphic to the free scalar on Σ, classically and at the
quantum level, and the two ends map into the slab through the structure maps.
"""

import logging
import sys
from fractions import Fraction
from typing import Any, Dict

from utils.bv_engine import sym_observables
from utils.field_models import (
    CellularInterval, Region, SpectralSurface, bump_cochains, correspondence_maps, green_defect,
    lagrangian_check, observables, quantum_cocycle_check, scalar_complex, slab_model, spectral_dolbeault,
    structure_map
)
from utils.graded_core import GradedAlgebraError, cohomology_dims, shift, shift_pairing
from utils.linear_algebra import to_fraction
from utils.report_handler import VerificationReport, load_config, print_summary, setup_logging, write_report

logger = logging.getLogger('BVFactorize.slab')

LEMMA = 'slab'

MODE_GRID = (0, 1, 2)
CELL_GRID = (2, 3)
QUANTUM_CELLS = 2
SKEWED_SURFACE = SpectralSurface(2, dbar={1: 3, 2: Fraction(1, 2)}, d={1: 1, 2: 5},
                                 weights={0: 2, 1: 3, 2: Fraction(1, 3)})


def _nonzero(dims: Dict[int, int]) -> Dict[int, int]:
    return {k: v for k, v in dims.items() if v}


def check_classical(report: VerificationReport, surface: SpectralSurface, cells: int, kappa: Fraction) -> None:
    model = spectral_dolbeault(surface, kappa)
    report.add_check('Ω^{1,•} is a Lagrangian at t = 0',
                     lagrangian_check(model.boundary, model.pairing, model.lagrangian).all_hold, True, 'PAPER')
    report.add_check('Ω^{•,1} is a Lagrangian at t = N',
                     lagrangian_check(model.boundary, model.pairing, model.far_lagrangian).all_hold, True, 'PAPER')
    fields = slab_model(surface, cells, kappa)
    report.add_check('pairing is invariant on the conditioned slab', green_defect(fields).is_zero(), True, 'PAPER')
    scalar, _ = scalar_complex(surface)
    report.add_check('scalar complex H = Q in degrees 0 and 1', _nonzero(cohomology_dims(scalar)), {0: 1, 1: 1},
                     'DERIVED')
    report.add_check('H(slab fields) = H(scalar)', _nonzero(cohomology_dims(fields.complex)),
                     _nonzero(cohomology_dims(scalar)), 'PAPER')


def check_classical_grid(report: VerificationReport, kappa: Fraction) -> None:
    """The classical slab checks over N x modes, and once more on a spectrum with uneven eigenvalues and weights."""
    surfaces = {f"modes={pairs}": SpectralSurface(pairs) for pairs in MODE_GRID}
    surfaces['skewed'] = SKEWED_SURFACE
    failures = []
    for cells in CELL_GRID:
        for label, surface in surfaces.items():
            scratch = VerificationReport(LEMMA, {'cells': cells, 'surface': label})
            check_classical(scratch, surface, cells, kappa)
            failures += [[cells, label, name] for name in scratch.failed_checks()]
    report.add_check(f"classical slab checks for N in {list(CELL_GRID)}, modes in {list(MODE_GRID)} "
                     f"and a skewed spectrum", failures, [], 'DERIVED')


def check_quantum(report: VerificationReport, surface: SpectralSurface, sym_cut: int, hbar_cut: int,
                  kappa: Fraction) -> None:
    fields = slab_model(surface, QUANTUM_CELLS, kappa)
    slab_obs = observables(fields, sym_cut, hbar_cut)
    scalar, pairing = scalar_complex(surface)
    scalar_obs = sym_observables(shift(scalar, 1), shift_pairing(pairing, 1), sym_cut, hbar_cut, name='Obs(scalar)')
    modes = len(surface.modes)
    report.add_check(f"(Q + ħΔ)^2 = 0 on the slab observables ({modes} modes)",
                     all(slab_obs.identities().values()), True, 'TRIVIAL')
    report.add_check(f"H(Obs^q(slab)) = H(Obs^q(scalar)) ({modes} modes)", _nonzero(cohomology_dims(slab_obs.complex)),
                     _nonzero(cohomology_dims(scalar_obs.complex)), 'PAPER')


def check_ends(report: VerificationReport, pairs: int, cells: int, kappa: Fraction) -> None:
    """The chiral end [0, a) and the antichiral end (a, N] reduce to their L⊥[-1]."""
    model = spectral_dolbeault(SpectralSurface(pairs), kappa)
    cut = cells // 2
    expected_value = {'chiral': Fraction(-1, 2), 'antichiral': Fraction(1, 2)}
    ends = {'chiral': CellularInterval(cells, Region(0, cut, 'co')),
            'antichiral': CellularInterval(cells, Region(cut, cells, 'oc'))}
    for end, interval in ends.items():
        for label, phi in zip(('first edge', 'last edge', 'uniform'), bump_cochains(interval)):
            corr = correspondence_maps(model, interval, phi)
            report.add_check(f"{end} retraction ({label} φ)", corr.retraction.check().failed(), [], 'PAPER')
            cocycle = quantum_cocycle_check(model, corr)
            report.add_check(f"{end} <I a, I b> = 2 W(φ, Ψ) μ(a, b) ({label} φ)", cocycle.holds, True, 'DERIVED')
            report.add_check(f"{end} W(φ, Ψ) ({label} φ)", cocycle.whitney_value, expected_value[end], 'DERIVED')


def check_sectors(report: VerificationReport, sym_cut: int, hbar_cut: int, kappa: Fraction) -> None:
    """Obs(chiral) ⊗ Obs(antichiral) -> Obs(slab) commutes with the quantum differentials."""
    model = spectral_dolbeault(SpectralSurface(0), kappa)
    left = CellularInterval(QUANTUM_CELLS, Region(0, 1, 'co'))
    right = CellularInterval(QUANTUM_CELLS, Region(1, QUANTUM_CELLS, 'oc'))
    target = CellularInterval(QUANTUM_CELLS, Region(0, QUANTUM_CELLS, 'cc'))
    smap = structure_map(model, [left, right], target, sym_cut, hbar_cut)
    report.add_check('the sector map is a quantum chain map', smap.chain_map.is_chain_map(), True, 'PAPER')


def run_slab(config: Dict[str, Any]) -> VerificationReport:
    """
    Raises:
        ValueError: if κ is not a rational number
    """
    pairs, cells = config['modes'], config['cells']
    sym_cut, hbar_cut = config['symCut'], config['hbarCut']
    kappa = to_fraction(config['kappa'])
    report = VerificationReport(LEMMA, {'modes': pairs, 'cells': cells, 'symCut': sym_cut, 'hbarCut': hbar_cut,
                                        'kappa': kappa})
    check_classical(report, SpectralSurface(pairs), cells, kappa)
    check_classical_grid(report, kappa)
    check_ends(report, pairs, cells, kappa)
    quantum_cut = min(sym_cut, 2)
    if quantum_cut < sym_cut:
        logger.warning(f"Quantum slab observables are built at symCut {quantum_cut} instead of {sym_cut}")
    for quantum_pairs in MODE_GRID:
        check_quantum(report, SpectralSurface(quantum_pairs), quantum_cut, hbar_cut, kappa)
    check_sectors(report, quantum_cut, hbar_cut, kappa)
    return report


if __name__ == "__main__":
    setup_logging()
    try:
        result = run_slab(load_config()).finish()
    except GradedAlgebraError as e:
        logger.error(f"Verification error: {e}")
        sys.exit(1)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(2)
    write_report(result)
    print_summary(result)
    sys.exit(0 if result.passed else 1)
