# utils/report_handler.py
"""
Configuration loading, verification reports and their exports.
"""

import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import jsonschema
import pandas as pd
from tabulate import tabulate

from utils.algebras import rank_deficient, symplectic_block
from utils.graded_core import CochainComplex, ShiftedPairing
from utils.linear_algebra import RationalMatrix, format_fraction, to_fraction

logger = logging.getLogger('BVFactorize.report_handler')

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
DEFAULT_CONFIG_PATH = os.path.join(ROOT, 'default_config.json')
CONFIG_SCHEMA_PATH = os.path.join(ROOT, 'verification_config_schema.json')
REPORT_SCHEMA_PATH = os.path.join(ROOT, 'report_schema.json')
POISSON_SCHEMA_PATH = os.path.join(ROOT, 'poisson_schema.json')
COMPLEX_SCHEMA_PATH = os.path.join(ROOT, 'complex_schema.json')
LOG_PATH = 'bvfactorize.log'

SCHEMA_VERSION = '1.0'
PROVENANCE_TAGS = ('PAPER', 'DERIVED', 'TRIVIAL')
NAMED_BIVECTORS = ('zero', 'symplectic', 'rank-deficient')


def setup_logging(level: int = logging.INFO, log_file: Optional[str] = LOG_PATH) -> logging.Logger:
    """Configure the 'BVFactorize' logger once per entry point: stderr plus an optional log file."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=handlers,
    )
    return logging.getLogger('BVFactorize')


def load_json(path: str) -> Any:
    """
    Args:
        path: Path to a JSON document

    Raises:
        FileNotFoundError: if the file doesn't exist
        ValueError: if the file is not valid JSON
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON in {path}: {e}")


def to_jsonable(value: Any) -> Any:
    """Fractions become "p/q" strings, tuples lists and dictionary keys strings."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, float):
        return format_fraction(Fraction(value))
    if isinstance(value, dict):
        return {str(k if not isinstance(k, tuple) else ','.join(map(str, k))): to_jsonable(v)
                for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, RationalMatrix):
        return [[format_fraction(x) for x in row] for row in value.to_dense()]
    return str(value)


# --- configuration ---

def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Merge default_config.json, an optional config file and command-line overrides (None values skipped),
    then validate the result against verification_config_schema.json.

    Raises:
        FileNotFoundError: if a config file is missing
        ValueError: if a document is malformed or the merged config fails validation
    """
    config = dict(load_json(DEFAULT_CONFIG_PATH))
    if path:
        document = load_json(path)
        if not isinstance(document, dict):
            raise ValueError(f"Config file {path} must contain a JSON object")
        config.update(document)
    for key, value in (overrides or {}).items():
        if value is not None:
            config[key] = value
    validate_config(config)
    logger.debug(f"Merged configuration: {config}")
    return config


def validate_config(config: Dict[str, Any]) -> None:
    schema = load_json(CONFIG_SCHEMA_PATH)
    try:
        jsonschema.validate(instance=config, schema=schema)
    except jsonschema.ValidationError as e:
        location = '.'.join(str(p) for p in e.path) or 'config'
        raise ValueError(f"Invalid configuration at {location}: {e.message}")


def load_poisson(source: str, dim: int) -> RationalMatrix:
    """
    Resolve --pi: one of 'zero', 'symplectic', 'rank-deficient', or a JSON file of "p/q" entries.

    Raises:
        FileNotFoundError: if the file is missing
        ValueError: if the file is malformed, the matrix is not dim x dim or not antisymmetric
    """
    if source == 'zero':
        return RationalMatrix.zeros(dim, dim)
    if source == 'symplectic':
        return symplectic_block(dim)
    if source == 'rank-deficient':
        return rank_deficient(dim)
    document = load_json(source)
    try:
        jsonschema.validate(instance=document, schema=load_json(POISSON_SCHEMA_PATH))
    except jsonschema.ValidationError as e:
        raise ValueError(f"Invalid Poisson file {source}: {e.message}")
    rows = document['pi']
    if len(rows) != dim or any(len(row) != dim for row in rows):
        raise ValueError(f"Poisson file {source} is not a {dim}x{dim} matrix")
    pi = RationalMatrix.from_dense([[to_fraction(x) for x in row] for row in rows], cols=dim)
    if pi.transpose() != -pi:
        raise ValueError(f"Poisson file {source} is not antisymmetric")
    return pi


# --- reports ---

@dataclass
class Check:
    name: str
    computed: Any
    expected: Any
    provenance: str
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'computed': to_jsonable(self.computed), 'expected': to_jsonable(self.expected),
                'provenance': self.provenance, 'passed': self.passed}


@dataclass
class VerificationReport:
    """The outcome of one verification subcommand: every identity checked, with its provenance."""
    lemma: str
    inputs: Dict[str, Any]
    checks: List[Check] = field(default_factory=list)
    wall_time_ms: int = 0
    started: float = field(default_factory=time.perf_counter, repr=False)

    def add_check(self, name: str, computed: Any, expected: Any, provenance: str) -> bool:
        """
        Record computed against expected; the check passes iff both are exactly equal.

        Raises:
            ValueError: for an unknown provenance tag
        """
        if provenance not in PROVENANCE_TAGS:
            raise ValueError(f"Unknown provenance '{provenance}', expected one of {PROVENANCE_TAGS}")
        passed = computed == expected
        self.checks.append(Check(name, computed, expected, provenance, passed))
        if passed:
            logger.info(f"[{self.lemma}] {name}: ok")
        else:
            logger.error(f"[{self.lemma}] {name}: computed {computed}, expected {expected}")
        return passed

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def finish(self, timing: bool = True) -> 'VerificationReport':
        self.wall_time_ms = int((time.perf_counter() - self.started) * 1000) if timing else 0
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': SCHEMA_VERSION,
            'lemma': self.lemma,
            'inputs': to_jsonable(self.inputs),
            'checks': [c.to_dict() for c in self.checks],
            'passed': self.passed,
            'wall_time_ms': self.wall_time_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


def validate_report(payload: Dict[str, Any]) -> None:
    """
    Raises:
        ValueError: if the report does not match report_schema.json
    """
    try:
        jsonschema.validate(instance=payload, schema=load_json(REPORT_SCHEMA_PATH))
    except jsonschema.ValidationError as e:
        raise ValueError(f"Report does not match its schema: {e.message}")


def write_report(report: VerificationReport, json_out: Optional[str] = None, stream=None) -> str:
    """Validate the report, write it to standard output and optionally to a file."""
    payload = report.to_dict()
    validate_report(payload)
    text = report.to_json()
    print(text, file=stream or sys.stdout)
    if json_out:
        directory = os.path.dirname(json_out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(json_out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
        logger.info(f"Report written to {json_out}")
    return text


def _cell(value: Any, width: int = 60) -> str:
    text = json.dumps(to_jsonable(value), ensure_ascii=False)
    return text if len(text) <= width else text[:width - 3] + '...'


def summary_table(report: VerificationReport) -> str:
    rows = [[c.name, _cell(c.computed), _cell(c.expected), c.provenance, 'PASS' if c.passed else 'FAIL']
            for c in report.checks]
    return tabulate(rows, headers=['Check', 'Computed', 'Expected', 'Provenance', 'Result'], tablefmt='grid')


def print_summary(report: VerificationReport, stream=None) -> None:
    stream = stream or sys.stderr
    status = 'PASSED' if report.passed else 'FAILED'
    print(f"\n=== {report.lemma}: {status} ({len(report.checks)} checks, {report.wall_time_ms} ms) ===", file=stream)
    print(summary_table(report), file=stream)


def report_dataframe(report: VerificationReport) -> pd.DataFrame:
    return pd.DataFrame([
        {'Check': c.name, 'Computed': json.dumps(to_jsonable(c.computed), ensure_ascii=False),
         'Expected': json.dumps(to_jsonable(c.expected), ensure_ascii=False),
         'Provenance': c.provenance, 'Passed': c.passed}
        for c in report.checks
    ], columns=['Check', 'Computed', 'Expected', 'Provenance', 'Passed'])


def export_report_xlsx(report: VerificationReport, path: str) -> str:
    """
    Write the check table and the echoed inputs to an Excel workbook.

    Args:
        report: The finished report
        path: Target .xlsx path; parent directories are created

    Returns:
        The path written
    """
    if not path.endswith('.xlsx'):
        raise ValueError(f"Export path must end in .xlsx, got {path}")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    inputs = pd.DataFrame([{'Input': k, 'Value': json.dumps(v, ensure_ascii=False)}
                           for k, v in to_jsonable(report.inputs).items()], columns=['Input', 'Value'])
    with pd.ExcelWriter(path, engine='openpyxl') as writer:
        report_dataframe(report).to_excel(writer, sheet_name='Checks', index=False)
        inputs.to_excel(writer, sheet_name='Inputs', index=False)
    logger.info(f"Report for {report.lemma} exported to {path}")
    return path


# --- serialized complexes ---

def complex_document(complex_: CochainComplex, pairing: Optional[ShiftedPairing] = None) -> Dict[str, Any]:
    payload = complex_.to_dict()
    payload['labels'] = {str(k): list(v) for k, v in complex_.space.labels.items()}
    if pairing is not None:
        payload['pairing'] = pairing.to_dict()
    return payload


def load_complex(path: str) -> Tuple[CochainComplex, Optional[ShiftedPairing]]:
    """
    Read a complex (and its pairing, if present) validated against complex_schema.json.

    Raises:
        ValueError: if the document is malformed or d^2 != 0
    """
    document = load_json(path)
    try:
        jsonschema.validate(instance=document, schema=load_json(COMPLEX_SCHEMA_PATH))
    except jsonschema.ValidationError as e:
        raise ValueError(f"Invalid complex document {path}: {e.message}")
    complex_ = CochainComplex.from_dict(document)
    pairing = None
    if 'pairing' in document:
        payload = dict(document['pairing'])
        payload.setdefault('dims', document['dims'])
        pairing = ShiftedPairing.from_dict(payload)
    return complex_, pairing
