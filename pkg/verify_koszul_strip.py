# verify_koszul_strip.py

"""
The transverse strip of the linear Poisson sigma model with boundary conditions V[-1] at t = 0 and V∨ at
t = N: the strip is acyclic, its ends carry Sym(V∨) and Λ(V), and the structure map into the strip pairs
them by the augmentations. A Π term is turned on through the perturbation lemma on the half-space model.
"""

import itertools
import logging
import sys
from fractions import Fraction
from typing import Any, Dict, List

from utils.algebras import ExteriorElement, PolyElement, koszul_pairing
from utils.bv_engine import sym_map, sym_observables, sym_retraction
from utils.field_models import (
    CellularInterval, Region, boundary_perturbation, bump_cochains, conditioned_fields, correspondence_maps,
    koszul_strip_model, lagrangian_check, observables, poisson_boundary_differential, psm_half_space_model,
    strip_contraction, structure_map
)
from utils.graded_core import GradedAlgebraError, PerturbationError, cohomology_dims, hpl, shift_retraction
from utils.linear_algebra import RationalMatrix
from utils.report_handler import (
    VerificationReport, load_config, load_poisson, print_summary, setup_logging, write_report
)

logger = logging.getLogger('BVFactorize.koszul_strip')

LEMMA = 'koszul-strip'

LABELS = ('first edge', 'last edge', 'uniform')


def _nonzero(dims: Dict[int, int]) -> Dict[int, int]:
    return {k: v for k, v in dims.items() if v}


def check_conditions(report: VerificationReport, model) -> None:
    near = lagrangian_check(model.boundary, model.pairing, model.lagrangian)
    far = lagrangian_check(model.boundary, model.pairing, model.far_lagrangian)
    report.add_check('V[-1] is a Lagrangian at t = 0', near.all_hold, True, 'TRIVIAL')
    report.add_check('V∨ is a Lagrangian at t = N', far.all_hold, True, 'TRIVIAL')


def check_acyclic(report: VerificationReport, model, cells: int, sym_cut: int, hbar_cut: int) -> None:
    fields = conditioned_fields(model, CellularInterval(cells, Region(0, cells, 'cc')))
    report.add_check('conditioned strip fields are acyclic', _nonzero(cohomology_dims(fields.complex)), {},
                     'PAPER')
    contraction = strip_contraction(model, cells)
    report.add_check('contraction of the strip onto zero', contraction.check().failed(), [], 'DERIVED')
    obs = observables(fields, sym_cut, hbar_cut)
    report.add_check('H(Obs(strip)) = Q[ħ] in degree 0', _nonzero(cohomology_dims(obs.complex)),
                     {0: hbar_cut + 1}, 'PAPER')
    extended = sym_retraction(shift_retraction(contraction, 1), sym_cut, hbar_cut, check=False)
    report.add_check('Sym of the strip contraction retracts onto Q[ħ]',
                     [extended.small.dim, extended.retraction.check().failed()], [hbar_cut + 1, []], 'PAPER')


def check_ends(report: VerificationReport, model, cells: int) -> None:
    cut = cells // 2
    ends = [('[0, a)', CellularInterval(cells, Region(0, cut, 'co'))),
            ('(a, N]', CellularInterval(cells, Region(cut, cells, 'oc')))]
    for end, interval in ends:
        for label, phi in zip(LABELS, bump_cochains(interval)):
            corr = correspondence_maps(model, interval, phi)
            report.add_check(f"retraction of {end} onto L⊥[-1] ({label} φ)", corr.retraction.check().failed(), [],
                             'PAPER')
        report.add_check(f"H of {end} is its L⊥[-1]", _nonzero(cohomology_dims(corr.fields.complex)),
                         _nonzero(corr.small.space.dims), 'PAPER')


def check_koszul_pairing(report: VerificationReport, model, cells: int, sym_cut: int, hbar_cut: int) -> None:
    """q(f, λ) = P(m(I_0 f ⊗ I_N λ)), with P the projection of the acyclic strip onto Q[ħ]."""
    n = model.dim // 2
    cut = cells // 2
    left = CellularInterval(cells, Region(0, cut, 'co'))
    right = CellularInterval(cells, Region(cut, cells, 'oc'))
    target = CellularInterval(cells, Region(0, cells, 'cc'))
    smap = structure_map(model, [left, right], target, sym_cut, hbar_cut)
    report.add_check('the strip structure map is a chain map', smap.chain_map.is_chain_map(), True, 'TRIVIAL')
    left_corr = correspondence_maps(model, left, bump_cochains(left)[0])
    right_corr = correspondence_maps(model, right, bump_cochains(right)[-1])
    left_factors = [{smap.positions[0][g]: v for g, v in left_corr.inclusion.column(c).items()} for c in range(n)]
    right_factors = [{smap.positions[1][g]: v for g, v in right_corr.inclusion.column(d).items()} for d in range(n)]

    contraction = shift_retraction(strip_contraction(model, cells), 1)
    scalars = sym_observables(contraction.small, None, sym_cut, hbar_cut, name='Q[ħ]')
    projection = sym_map(contraction.projection, smap.target_observables, scalars, name='P')
    report.add_check('Sym(P) is a chain map onto Q[ħ]', projection.is_chain_map(), True, 'TRIVIAL')
    unit = scalars.index[((), 0)]

    computed: Dict[str, Fraction] = {}
    expected: Dict[str, Fraction] = {}
    restriction: List[str] = []
    for degree in range(sym_cut + 1):
        for exps in itertools.product(range(degree + 1), repeat=n):
            if sum(exps) != degree:
                continue
            for size in range(min(n, sym_cut - degree) + 1):
                for forms in itertools.combinations(range(n), size):
                    factors = [left_factors[c] for c, e in enumerate(exps) for _ in range(e)]
                    factors += [right_factors[d] for d in forms]
                    image = smap.target_observables.vector(smap.apply(smap.product(factors)))
                    value = projection.matrix.apply(image).get(unit, Fraction(0))
                    lam = ExteriorElement.unit(n)
                    for d in forms:
                        lam = lam.wedge(ExteriorElement.generator(n, d))
                    key = f"{list(exps)}|{list(forms)}"
                    computed[key] = value
                    expected[key] = koszul_pairing(PolyElement.monomial(exps), lam)
                    if not forms and value != expected[key]:
                        restriction.append(key)
    report.add_check('q(f, 1) is the augmentation of Sym(V∨)', restriction, [], 'PAPER')
    report.add_check('q(f, λ) through the strip equals aug(f) aug(λ)', computed, expected, 'DERIVED')


def check_strip_rejects_poisson(report: VerificationReport, model, pi: RationalMatrix, cells: int) -> None:
    n = pi.rows
    fields = conditioned_fields(model, CellularInterval(cells, Region(0, cells, 'cc')))
    q = poisson_boundary_differential(pi, model.boundary.space, list(range(n)), list(range(n, 2 * n)))
    try:
        hpl(strip_contraction(model, cells), boundary_perturbation(fields, q))
        rejected = False
    except PerturbationError as e:
        logger.info(f"Π perturbation of the strip rejected: {e}")
        rejected = True
    report.add_check('a Π term does not preserve the far condition of the strip', rejected, not pi.is_zero(),
                     'DERIVED')


def check_half_space(report: VerificationReport, pi: RationalMatrix, cells: int) -> None:
    """Perturbing the Π = 0 correspondence by Q_Π reproduces the correspondence of the Π model."""
    flat = psm_half_space_model(RationalMatrix.zeros(pi.rows, pi.rows))
    curved = psm_half_space_model(pi)
    interval = CellularInterval(cells, Region(0, cells, 'co'))
    for label, phi in zip(LABELS, bump_cochains(interval)):
        base = correspondence_maps(flat, interval, phi)
        target = correspondence_maps(curved, interval, phi)
        perturbed = hpl(base.retraction, boundary_perturbation(base.fields, curved.boundary.differential))
        report.add_check(f"perturbed inclusion equals I_Π ({label} φ)", perturbed.inclusion == target.inclusion,
                         True, 'DERIVED')
        report.add_check(f"perturbed boundary differential equals that of L⊥[-1] ({label} φ)",
                         perturbed.small.differential == target.small.differential, True, 'DERIVED')


def run_koszul_strip(config: Dict[str, Any]) -> VerificationReport:
    """
    Raises:
        ValueError: if the Poisson bivector is malformed or cells < 2
        FileNotFoundError: if a Poisson file is missing
    """
    dim_v, cells = config['dimV'], config['cells']
    sym_cut, hbar_cut = config['symCut'], config['hbarCut']
    if cells < 2:
        raise ValueError(f"The strip needs at least 2 cells, got {cells}")
    pi = load_poisson(config['pi'], dim_v)
    report = VerificationReport(LEMMA, {'dimV': dim_v, 'pi': config['pi'], 'cells': cells, 'symCut': sym_cut,
                                        'hbarCut': hbar_cut})
    model = koszul_strip_model(dim_v)
    check_conditions(report, model)
    check_acyclic(report, model, cells, sym_cut, hbar_cut)
    if dim_v == 0:
        return report
    check_ends(report, model, cells)
    check_koszul_pairing(report, model, cells, sym_cut, hbar_cut)
    check_strip_rejects_poisson(report, model, pi, cells)
    check_half_space(report, pi, cells)
    return report


if __name__ == "__main__":
    setup_logging()
    try:
        result = run_koszul_strip(load_config()).finish()
    except GradedAlgebraError as e:
        logger.error(f"Verification error: {e}")
        sys.exit(1)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(2)
    write_report(result)
    print_summary(result)
    sys.exit(0 if result.passed else 1)
