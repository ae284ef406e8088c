# manage_verification.py - Main entry point for BVFactorize

import argparse
import logging
import sys

from utils.graded_core import GradedAlgebraError
from utils.report_handler import export_report_xlsx, load_config, print_summary, setup_logging, write_report
from verify_boundary_algebras import run_boundary_algebras
from verify_cs_canonical import run_cs_canonical
from verify_higher_cs import run_higher_cs
from verify_koszul_strip import run_koszul_strip
from verify_props import run_props
from verify_psm_global import run_psm_global
from verify_slab import run_slab
from verify_swiss_cheese import run_swiss_cheese
from verify_topmech import run_topmech

logger = logging.getLogger('BVFactorize')

COMMANDS = {
    'topmech': (run_topmech, 'Weyl algebra and Fock module of topological mechanics'),
    'boundary-algebras': (run_boundary_algebras, 'Weyl, Fock, Moyal and exterior algebras on their own'),
    'swiss-cheese': (run_swiss_cheese, 'Lichnerowicz and Brylinski complexes of a constant Poisson bivector'),
    'koszul-strip': (run_koszul_strip, 'Acyclic transverse strip and the Koszul pairing'),
    'psm-global': (run_psm_global, 'Global observables of the Poisson sigma model on a surface'),
    'slab': (run_slab, 'Chern-Simons slab with chiral and antichiral WZW ends'),
    'cs-canonical': (run_cs_canonical, 'Canonical quantization of Chern-Simons theory on Σ x R>=0'),
    'higher-cs': (run_higher_cs, 'Pushforward of higher Chern-Simons theory along CP^2n'),
    'props': (run_props, 'Invariant suites shared by every model'),
}

# command-line flag -> config key
FLAGS = {
    'g': 'g', 'b': 'b', 'dimV': 'dimV', 'pi': 'pi', 'cells': 'cells', 'modes': 'modes',
    'sym_cut': 'symCut', 'hbar_cut': 'hbarCut', 'poly_cut': 'polyCut', 'seed': 'seed', 'n': 'n',
    'kappa': 'kappa', 'vol': 'vol',
}


def _add_common_arguments(subparser: argparse.ArgumentParser) -> None:
    subparser.add_argument('--config', help='JSON config file; flags override its values')
    subparser.add_argument('--g', type=int, help='Genus of the surface')
    subparser.add_argument('--b', type=int, help='Number of boundary circles')
    subparser.add_argument('--dimV', type=int, help='Dimension of the target V')
    subparser.add_argument('--pi', help="Poisson bivector: zero, symplectic, rank-deficient or a JSON file")
    subparser.add_argument('--cells', type=int, help='Cells of the interval [0, N]')
    subparser.add_argument('--modes', type=int, help='Fourier mode pairs of the spectral surface')
    subparser.add_argument('--sym-cut', type=int, help='Symmetric-degree cutoff')
    subparser.add_argument('--hbar-cut', type=int, help='ħ-degree cutoff')
    subparser.add_argument('--poly-cut', type=int, help='Polyvector degree cutoff')
    subparser.add_argument('--seed', type=int, help='Seed for random basis changes')
    subparser.add_argument('--n', type=int, help='Half the complex dimension of CP^2n')
    subparser.add_argument('--kappa', help='Level κ as a rational "p/q"')
    subparser.add_argument('--vol', help='vol(CP^2n) as a positive rational "p/q"')
    subparser.add_argument('--json-out', help='Also write the JSON report to this path')
    subparser.add_argument('--export', help='Export the check table to an Excel file at this path')
    subparser.add_argument('--no-timing', action='store_true', help='Report a wall time of 0 ms')


def setup_parser():
    """Set up the argument parser with one subcommand per verification"""
    parser = argparse.ArgumentParser(
        description='BVFactorize - Exact verification of bulk-boundary BV factorization algebras',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python manage_verification.py topmech --dimV 2 --cells 4 --sym-cut 3     Weyl algebra from an interval
  python manage_verification.py psm-global --g 1 --b 1 --dimV 2 --pi zero  Rank-one global observables
  python manage_verification.py koszul-strip --dimV 0                      Trivially acyclic strip
  python manage_verification.py slab --modes 2 --export slab.xlsx          Slab checks exported to Excel
"""
    )

    subparsers = parser.add_subparsers(dest='command', help='Verification to run')
    for name, (_, description) in COMMANDS.items():
        _add_common_arguments(subparsers.add_parser(name, help=description))

    return parser


def collect_overrides(args: argparse.Namespace) -> dict:
    overrides = {key: getattr(args, flag) for flag, key in FLAGS.items()}
    for key in ('kappa', 'vol'):
        value = overrides[key]
        if value is not None and value.lstrip('-').isdigit():
            overrides[key] = int(value)
    return overrides


def main(argv=None):
    """Main entry point for the application"""
    parser = setup_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return 1

    setup_logging()
    runner, _ = COMMANDS[args.command]
    logger.info(f"=== BVFactorize - {args.command} ===")

    try:
        config = load_config(args.config, collect_overrides(args))
        report = runner(config).finish(timing=not args.no_timing)
        write_report(report, args.json_out)
        print_summary(report)
        if args.export:
            export_report_xlsx(report, args.export)
    except GradedAlgebraError as e:
        logger.error(f"Verification error: {e}")
        return 1
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except KeyboardInterrupt:
        print("\nOperation cancelled.", file=sys.stderr)
        return 130  # Standard exit code for SIGINT
    except Exception as e:
        logger.exception(f"An error occurred: {e}")
        return 1

    if not report.passed:
        logger.error(f"Failed checks: {', '.join(report.failed_checks())}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
