#!/usr/bin/env python3
"""
Main execution script for the cone dbar verification harness
"""

import sys
import os
import argparse

# Add src to Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from cone_dbar.verification_manager import VerificationManager, build_family
from cone_dbar.utils.logger import setup_logging
from cone_dbar.utils.report_generator import ReportGenerator
from cone_dbar.utils.console_formatter import ConsoleFormatter
from cone_dbar.models.results import EstimateCase, ESTIMATE_CASES
from cone_dbar.exceptions import ConfigError, InvalidCaseError, ConeDbarError
from cone_dbar.config.settings import config, load_config

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--n', type=int, default=None, help='Grid points per axis')
    common.add_argument('--seed', type=int, default=None, help='Master seed for every random draw')
    common.add_argument('--config', type=str, default=None, help='Flat key = value configuration file')
    common.add_argument('--out', type=str, default=None, help='Output directory for CSV and JSON artifacts')
    common.add_argument('--log-level', '-l', type=str, default=None,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help='Set logging level')

    parser = argparse.ArgumentParser(
        description='Cone dbar harness - numerical verification of weighted estimates on {z3^2 = z1 z2}')
    commands = parser.add_subparsers(dest='command', required=True)

    commands.add_parser('check-geometry', parents=[common], help='Metric, frame and structure-coefficient checks')
    commands.add_parser('check-operators', parents=[common], help='dbar^2, frame decompositions, commutators')
    commands.add_parser('check-adjoint', parents=[common], help='Discrete adjoint pairing under refinement')
    commands.add_parser('check-norms', parents=[common], help='Hoelder step, volume of X, spectral norms')
    commands.add_parser('friedrichs', parents=[common], help='Mollifier convergence studies')

    estimate = commands.add_parser('estimate', parents=[common], help='Sweep one estimate case')
    estimate.add_argument('case', choices=sorted(ESTIMATE_CASES), help='Estimate case id')
    estimate.add_argument('--epsilon', type=float, default=None, help='Sobolev order (E4-E6, E8)')
    estimate.add_argument('--p', type=float, default=None, help='Lebesgue exponent (E4-E6, E8)')
    estimate.add_argument('--forms', type=int, default=None, help='Seeds per support radius')
    estimate.add_argument('--refinement-n', type=int, default=None, help='Second resolution')
    estimate.add_argument('--snapshot', action='store_true', help='Write the first form at each resolution')

    sweep = commands.add_parser('sweep', parents=[common], help='Sweep every estimate case')
    sweep.add_argument('--forms', type=int, default=None, help='Seeds per support radius')
    sweep.add_argument('--refinement-n', type=int, default=None, help='Second resolution')
    sweep.add_argument('--snapshot', action='store_true', help='Write the first form at each resolution')

    commands.add_parser('report', parents=[common], help='Collect summaries into report.json')
    return parser


def apply_overrides(args) -> None:
    """Config file first, then command-line flags"""
    if args.config:
        load_config(args.config, base=config)
    if args.n is not None:
        config.grid.n = args.n
    if args.seed is not None:
        config.harness.seed = args.seed
    if args.out is not None:
        config.harness.out_dir = args.out
    if args.log_level is not None:
        config.log_level = args.log_level
    if getattr(args, 'forms', None) is not None:
        config.harness.n_forms = args.forms
    if getattr(args, 'refinement_n', None) is not None:
        config.grid.refinement_n = args.refinement_n


def run_case(system: VerificationManager, reports: ReportGenerator, formatter: ConsoleFormatter,
             case: EstimateCase) -> bool:
    family = build_family()
    resolutions = [config.grid.n, config.grid.refinement_n]
    print(formatter.format_progress_message(
        f"{case.label}: {len(family)} forms at n = {resolutions}"))
    report = system.run_sweep(case, family, resolutions)
    rows_path = reports.save_rows_csv(report.rows, case.label)
    summary = report.to_summary(rows_path)
    reports.save_summary_json(summary, case.label)
    print(formatter.format_estimate_summary(summary))
    return report.passed


def save_snapshots(system: VerificationManager, reports: ReportGenerator, formatter: ConsoleFormatter) -> None:
    """First form of the family at both resolutions, under <out>/snapshots"""
    paths = system.save_form_snapshots(build_family()[0], [config.grid.n, config.grid.refinement_n],
                                       os.path.join(reports.out_dir, 'snapshots'))
    print(formatter.format_info_message(f"Snapshots: {', '.join(os.path.basename(p) for p in paths)}"))


def main():
    """Main execution function"""
    parser = build_parser()
    args = parser.parse_args()
    console_formatter = ConsoleFormatter()

    try:
        apply_overrides(args)
    except ConfigError as e:
        print(console_formatter.format_error_message(f"Configuration error: {e}"))
        return EXIT_USAGE

    # Setup logging
    logger = setup_logging(config.log_level)

    try:
        reports = ReportGenerator()

        if args.command == 'report':
            summaries = reports.collect_summaries()
            print(console_formatter.format_report_table(summaries))
            report_path = reports.save_report(summaries)
            print(console_formatter.format_success_message(f"Report saved: {report_path}"))
            passed = bool(summaries) and all(bool(s.get('passed', s.get('stable', False))) for s in summaries)
            return EXIT_OK if passed else EXIT_VERDICT

        if args.command == 'estimate':
            case = EstimateCase(args.case, args.epsilon, args.p)
            system = VerificationManager()
            passed = run_case(system, reports, console_formatter, case)
            if args.snapshot:
                save_snapshots(system, reports, console_formatter)
            return EXIT_OK if passed else EXIT_VERDICT

        system = VerificationManager()

        if args.command == 'sweep':
            cases = system.sweep_cases()
            results = []
            for step, case in enumerate(cases, 1):
                logger.info(f"Sweep step {step}/{len(cases)}: {case.label}")
                print(console_formatter.format_progress_message(case.label, step, len(cases)))
                results.append(run_case(system, reports, console_formatter, case))
            if args.snapshot:
                save_snapshots(system, reports, console_formatter)
            passed = all(results)
        elif args.command == 'check-geometry':
            summary = system.check_geometry()
            reports.save_summary_json(summary, 'check_geometry')
            print(console_formatter.format_check_summary('Geometry checks', summary))
            passed = summary['passed']
        elif args.command == 'check-operators':
            summary = system.check_operators()
            reports.save_summary_json(summary, 'check_operators')
            print(console_formatter.format_check_summary('Operator checks', summary))
            passed = summary['passed']
        elif args.command == 'check-norms':
            summary = system.check_norms()
            reports.save_summary_json(summary, 'check_norms')
            print(console_formatter.format_check_summary('Norm checks', summary))
            passed = summary['passed']
        elif args.command == 'check-adjoint':
            summary = system.check_adjoint()
            summary['rows_csv'] = reports.save_rows_csv(system.last_rows, 'check_adjoint')
            reports.save_summary_json(summary, 'check_adjoint')
            print(console_formatter.format_check_summary('Adjoint pairing', summary))
            passed = summary['passed']
        else:
            rows, summary = system.friedrichs()
            summary['rows_csv'] = reports.save_rows_csv(rows, 'friedrichs')
            reports.save_summary_json(summary, 'friedrichs')
            print(console_formatter.format_check_summary('Friedrichs studies', summary))
            passed = summary['passed']

        print(console_formatter.format_info_message(f"Artifacts written to {reports.out_dir}"))
        if passed:
            print(console_formatter.format_success_message("All verdicts passed"))
        else:
            print(console_formatter.format_error_message("At least one verdict failed"))
        logger.info(f"{args.command} completed: passed={passed}")
        return EXIT_OK if passed else EXIT_VERDICT

    except InvalidCaseError as e:
        print(console_formatter.format_error_message(f"Invalid case: {e}"))
        return EXIT_USAGE
    except KeyboardInterrupt:
        logger.info("Execution interrupted by user")
        return EXIT_VERDICT
    except ConeDbarError as e:
        logger.error(f"Verification error: {e}")
        print(console_formatter.format_error_message(str(e)))
        return EXIT_VERDICT


if __name__ == "__main__":
    exit(main())
