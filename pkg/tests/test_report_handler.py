# tests/test_report_handler.py

import io
import json
import os
import sys
from fractions import Fraction

import pytest
from openpyxl import load_workbook

# Add parent directory to sys.path to import utils module
sys.path.append(os.path.abspath(os.path.join(os.getcwd(), "utils/..")))

from utils.algebras import symplectic_block
from utils.field_models import CellularInterval, Region
from utils.linear_algebra import RationalMatrix
from utils.report_handler import (
    VerificationReport, complex_document, export_report_xlsx, load_complex, load_config, load_poisson,
    print_summary, report_dataframe, setup_logging, to_jsonable, validate_report, write_report
)


@pytest.fixture
def report():
    report = VerificationReport('props', {'symCut': 2, 'kappa': Fraction(1, 2)})
    report.add_check('identity holds', True, True, 'TRIVIAL')
    report.add_check('dims agree', {0: 1}, {0: 1, 1: 1}, 'DERIVED')
    return report.finish(timing=False)


@pytest.fixture
def poisson_file(tmp_path):
    def write(document):
        path = tmp_path / "pi.json"
        path.write_text(json.dumps(document), encoding='utf-8')
        return str(path)
    return write


# --- Configuration tests ---

def test_load_config_defaults_and_overrides():
    config = load_config()
    assert config['symCut'] == 3
    assert config['pi'] == 'zero'
    merged = load_config(None, {'symCut': 2, 'g': None})
    assert merged['symCut'] == 2
    assert merged['g'] == config['g']


def test_load_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({'dimV': 4, 'kappa': '-3/2'}), encoding='utf-8')
    config = load_config(str(path))
    assert config['dimV'] == 4
    assert config['kappa'] == '-3/2'


@pytest.mark.parametrize("overrides", [{'cells': 1}, {'kappa': '1.5'}, {'symCut': 'three'}, {'unknown': 1}])
def test_load_config_rejects_invalid_values(overrides):
    with pytest.raises(ValueError):
        load_config(None, overrides)


def test_load_config_missing_or_malformed_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / "missing.json"))
    path = tmp_path / "list.json"
    path.write_text('[1, 2]', encoding='utf-8')
    with pytest.raises(ValueError):
        load_config(str(path))
    path.write_text('{not json', encoding='utf-8')
    with pytest.raises(ValueError):
        load_config(str(path))


# --- Poisson bivector tests ---

def test_load_named_bivectors():
    assert load_poisson('zero', 3).is_zero()
    assert load_poisson('symplectic', 2) == symplectic_block(2)
    assert load_poisson('rank-deficient', 3)[0, 1] == 1


def test_load_poisson_file(poisson_file):
    pi = load_poisson(poisson_file({'pi': [[0, "1/2"], ["-1/2", 0]]}), 2)
    assert pi[0, 1] == Fraction(1, 2)
    assert pi[1, 0] == Fraction(-1, 2)


@pytest.mark.parametrize("document, dim", [
    ({'pi': [[0, 1], [1, 0]]}, 2),
    ({'pi': [[0, 1], [-1, 0]]}, 3),
    ({'pi': [[0, 0.5], [-0.5, 0]]}, 2),
    ({'matrix': [[0]]}, 1),
])
def test_load_poisson_rejects_bad_files(poisson_file, document, dim):
    with pytest.raises(ValueError):
        load_poisson(poisson_file(document), dim)


# --- Report tests ---

def test_to_jsonable_formats_exact_values():
    value = {(1, 2): Fraction(1, 2), 'b': [True, None], 'm': RationalMatrix.identity(2)}
    assert to_jsonable(value) == {'1,2': '1/2', 'b': [True, None], 'm': [['1', '0'], ['0', '1']]}


def test_report_records_passes_and_failures(report):
    assert not report.passed
    assert report.failed_checks() == ['dims agree']
    assert report.wall_time_ms == 0
    with pytest.raises(ValueError):
        report.add_check('untagged', 1, 1, 'GUESS')


def test_report_payload_matches_schema(report):
    payload = report.to_dict()
    validate_report(payload)
    assert payload['inputs'] == {'kappa': '1/2', 'symCut': 2}
    assert payload['checks'][1]['computed'] == {'0': 1}
    with pytest.raises(ValueError):
        validate_report({'lemma': 'props'})


def test_write_report_to_stdout_and_file(report, tmp_path, capsys):
    target = tmp_path / "reports" / "props.json"
    write_report(report, str(target))
    printed = json.loads(capsys.readouterr().out)
    assert printed['lemma'] == 'props'
    assert json.loads(target.read_text(encoding='utf-8')) == printed


def test_write_report_to_stream(report):
    stream = io.StringIO()
    text = write_report(report, stream=stream)
    assert stream.getvalue().strip() == text
    assert json.loads(text)['passed'] is False


def test_print_summary_table(report):
    stream = io.StringIO()
    print_summary(report, stream)
    output = stream.getvalue()
    assert 'props: FAILED' in output
    assert 'PASS' in output
    assert 'FAIL' in output


# --- Export tests ---

def test_report_dataframe(report):
    frame = report_dataframe(report)
    assert list(frame.columns) == ['Check', 'Computed', 'Expected', 'Provenance', 'Passed']
    assert list(frame['Passed']) == [True, False]


def test_export_report_xlsx(report, tmp_path):
    path = export_report_xlsx(report, str(tmp_path / "out" / "props.xlsx"))
    workbook = load_workbook(path)
    assert workbook.sheetnames == ['Checks', 'Inputs']
    checks = workbook['Checks']
    assert checks.max_row == 3
    assert checks.cell(row=2, column=1).value == 'identity holds'
    with pytest.raises(ValueError):
        export_report_xlsx(report, str(tmp_path / "props.csv"))


# --- Serialized complex tests ---

def test_complex_document_is_read_back(tmp_path):
    interval = CellularInterval(2, Region(0, 2, 'cc'), 'full')
    complex_, pairing = interval.complex(), interval.whitney_pairing()
    path = tmp_path / "interval.json"
    path.write_text(json.dumps(complex_document(complex_, pairing)), encoding='utf-8')
    loaded, loaded_pairing = load_complex(str(path))
    assert loaded.space.dims == complex_.space.dims
    assert loaded.differential == complex_.differential
    assert loaded_pairing.gram == pairing.gram
    assert loaded_pairing.degree == -1


def test_load_complex_rejects_missing_differential(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({'dims': {'0': 1}}), encoding='utf-8')
    with pytest.raises(ValueError):
        load_complex(str(path))


def test_setup_logging_returns_project_logger():
    assert setup_logging(log_file=None).name == 'BVFactorize'
