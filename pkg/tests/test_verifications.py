# tests/test_verifications.py

import json
import os
import sys
from fractions import Fraction

import pytest

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from manage_verification import COMMANDS, main
from utils.field_models import SpectralSurface
from utils.graded_core import NotAComplexError
from utils.report_handler import VerificationReport, load_config, validate_report
from verify_boundary_algebras import run_boundary_algebras
from verify_cs_canonical import run_cs_canonical
from verify_higher_cs import run_higher_cs
from verify_koszul_strip import run_koszul_strip
from verify_props import run_props
from verify_psm_global import check_global_grid, run_psm_global
from verify_slab import SKEWED_SURFACE, check_classical, check_classical_grid, check_quantum, run_slab
from verify_swiss_cheese import check_rank_grid, run_swiss_cheese
from verify_topmech import check_grid, run_topmech


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    # keeps bvfactorize.log out of the source tree
    monkeypatch.chdir(tmp_path)
    return tmp_path


# --- Subcommand tests ---

@pytest.mark.parametrize("runner, overrides", [
    (run_topmech, {'dimV': 2, 'cells': 2, 'symCut': 2, 'hbarCut': 1}),
    (run_topmech, {'dimV': 0}),
    (run_boundary_algebras, {'dimV': 2, 'pi': 'symplectic', 'symCut': 2}),
    (run_swiss_cheese, {'dimV': 2, 'pi': 'symplectic', 'polyCut': 2}),
    (run_koszul_strip, {'dimV': 1, 'cells': 2, 'symCut': 2, 'hbarCut': 1}),
    (run_psm_global, {'g': 0, 'b': 1, 'dimV': 1}),
    (run_slab, {'modes': 0, 'cells': 2, 'symCut': 2, 'hbarCut': 1}),
    (run_cs_canonical, {'g': 1, 'cells': 2, 'symCut': 2, 'hbarCut': 1}),
    (run_higher_cs, {'n': 1, 'modes': 0}),
])
def test_small_configurations_pass(runner, overrides):
    report = runner(load_config(None, overrides)).finish()
    validate_report(report.to_dict())
    assert report.checks
    assert report.passed, report.failed_checks()


def test_props_suite_passes():
    report = run_props(load_config(None, {'symCut': 2, 'hbarCut': 1}))
    assert report.passed, report.failed_checks()


def test_psm_global_grid_covers_every_bivector():
    report = VerificationReport('psm-global', {})
    check_global_grid(report)
    assert [check.passed for check in report.checks] == [True, True]
    assert 'rank-deficient' in report.checks[0].name


def test_topmech_rejects_odd_dimension():
    with pytest.raises(ValueError):
        run_topmech(load_config(None, {'dimV': 3}))


def test_higher_cs_rejects_non_positive_volume():
    with pytest.raises(ValueError):
        run_higher_cs(load_config(None, {'vol': '-1'}))


def test_koszul_strip_rejects_missing_poisson_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        run_koszul_strip(load_config(None, {'dimV': 1, 'pi': str(tmp_path / "missing.json")}))

# --- Grid tests ---

def test_topmech_grid_sweeps_dimensions_and_cells():
    report = VerificationReport('topmech', {})
    check_grid(report)
    assert len(report.checks) == 1
    assert report.passed, report.checks[0].computed


def test_slab_classical_grid_includes_the_skewed_spectrum():
    report = VerificationReport('slab', {})
    check_classical_grid(report, Fraction(1))
    assert report.passed, report.checks[0].computed
    skewed = VerificationReport('slab', {})
    check_classical(skewed, SKEWED_SURFACE, 3, Fraction(2))
    assert skewed.passed, skewed.failed_checks()


@pytest.mark.parametrize("pairs", [0, 1, 2])
def test_slab_quantum_observables_match_the_scalar(pairs):
    report = VerificationReport('slab', {})
    check_quantum(report, SpectralSurface(pairs), 2, 1, Fraction(1))
    assert len(report.checks) == 2
    assert report.passed, report.failed_checks()


def test_swiss_cheese_rank_grid_passes():
    report = VerificationReport('swiss-cheese', {})
    check_rank_grid(report, seed=0)
    assert [check.passed for check in report.checks] == [True, True]



# --- Command-line tests ---

def test_every_subcommand_is_registered():
    assert set(COMMANDS) == {'topmech', 'boundary-algebras', 'swiss-cheese', 'koszul-strip', 'psm-global', 'slab',
                             'cs-canonical', 'higher-cs', 'props'}


def test_main_without_command_prints_help(workdir, capsys):
    assert main([]) == 1
    assert 'usage' in capsys.readouterr().out


def test_main_trivial_strip_exits_zero(workdir, capsys):
    assert main(['koszul-strip', '--dimV', '0']) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload['lemma'] == 'koszul-strip'
    assert payload['passed'] is True


def test_main_malformed_configuration_exits_two(workdir):
    assert main(['topmech', '--cells', '1']) == 2
    assert main(['higher-cs', '--kappa', '1.5']) == 2
    assert main(['psm-global', '--config', str(workdir / "missing.json")]) == 2


def test_main_internal_error_exits_one(workdir, monkeypatch):
    def broken(config):
        raise NotAComplexError("d∘d ≠ 0 on 'broken'")

    monkeypatch.setitem(COMMANDS, 'koszul-strip', (broken, 'raises an algebra error'))
    assert main(['koszul-strip', '--dimV', '0']) == 1


def test_main_failed_check_exits_one(workdir, monkeypatch):
    def failing(config):
        report = VerificationReport('koszul-strip', {'dimV': config['dimV']})
        report.add_check('deliberately wrong expectation', 1, 2, 'TRIVIAL')
        return report

    monkeypatch.setitem(COMMANDS, 'koszul-strip', (failing, 'one failing check'))
    assert main(['koszul-strip', '--dimV', '0', '--no-timing']) == 1


def test_main_writes_json_and_excel(workdir):
    json_out = workdir / "reports" / "strip.json"
    export = workdir / "reports" / "strip.xlsx"
    code = main(['koszul-strip', '--dimV', '0', '--json-out', str(json_out), '--export', str(export), '--no-timing'])
    assert code == 0
    assert json.loads(json_out.read_text(encoding='utf-8'))['wall_time_ms'] == 0
    assert export.exists()
