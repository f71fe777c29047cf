#!/usr/bin/env python3
"""
vpmc - Moment-based optimal control of the 1D Vlasov-Poisson system

Solve the kinetic and moment systems, optimize a static external field,
evaluate it against the kinetic model and render the results.
"""

import argparse
import sys
import traceback
from pathlib import Path
from typing import List, Optional

from .errors import ConfigError, FormatError, ModelError, NumericError
from .utils import DEFAULT_OUTPUT_DIR


# Exit codes
EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_NOT_CONVERGED = 2
EXIT_CONFIG = 3

PRESET_NAMES = ['two-stream', 'bump-on-tail']


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', type=Path, help='Config file with key = value lines')
    parser.add_argument('--preset', choices=PRESET_NAMES, help='Built-in experiment preset')
    parser.add_argument('--out', type=Path, help=f'Output directory (default: {DEFAULT_OUTPUT_DIR})')
    parser.add_argument('--set', dest='overrides', action='append', default=[], metavar='KEY=VALUE',
                        help='Override a config key (repeatable)')


def create_parser() -> argparse.ArgumentParser:
    """Create main parser and subcommands"""
    parser = argparse.ArgumentParser(
        description="vpmc - Moment-based optimal control of the 1D Vlasov-Poisson system",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Uncontrolled kinetic reference run
  %(prog)s solve-vp --preset two-stream --out runs/baseline

  # Optimize H on the moment system, then evaluate it kinetically
  %(prog)s optimize --preset two-stream --out runs/ts
  %(prog)s evaluate --preset two-stream --params runs/ts/params.csv --baseline --out runs/ts

  # Moment-count sweep and plots
  %(prog)s optimize --preset two-stream --orders 10,20,30 --out runs/sweep
  %(prog)s plot --input runs/ts --out runs/ts/plots

  # Property suite
  %(prog)s verify

For more information on each command, use:
  %(prog)s <command> --help
        """
    )

    from . import __version__
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # solve-vp subcommand
    vp_parser = subparsers.add_parser('solve-vp', help='Run the kinetic Vlasov-Poisson solver')
    _add_config_arguments(vp_parser)
    vp_parser.add_argument('--params', type=Path, help='Control parameters (k,type,value); zero field if omitted')

    # solve-moments subcommand
    moments_parser = subparsers.add_parser('solve-moments', help='Run the Hermite moment system')
    _add_config_arguments(moments_parser)
    moments_parser.add_argument('--params', type=Path, help='Control parameters (k,type,value); zero field if omitted')

    # optimize subcommand
    optimize_parser = subparsers.add_parser('optimize', help='Optimize the static control field')
    _add_config_arguments(optimize_parser)
    optimize_parser.add_argument('--orders', help='Comma-separated moment orders to sweep (e.g. 10,20,30)')

    # evaluate subcommand
    evaluate_parser = subparsers.add_parser('evaluate', help='Evaluate a control field on the kinetic solver')
    _add_config_arguments(evaluate_parser)
    evaluate_parser.add_argument('--params', type=Path, required=True, help='Control parameters file')
    evaluate_parser.add_argument('--baseline', action='store_true', help='Also run the uncontrolled baseline')

    # plot subcommand
    plot_parser = subparsers.add_parser('plot', help='Render SVG plots from run artifacts')
    _add_config_arguments(plot_parser)
    plot_parser.add_argument('--input', type=Path, help='Directory with run artifacts (default: --out)')

    # verify subcommand
    subparsers.add_parser('verify', help='Run the numerical property suite')

    return parser


def parse_orders(text: Optional[str]) -> Optional[List[int]]:
    """Parse "10,20,30" into [10, 20, 30]"""
    if not text:
        return None
    try:
        orders = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise ConfigError(f"Invalid --orders value: {text!r}", key='moments.order') from None
    if not orders or min(orders) < 1:
        raise ConfigError(f"Moment orders must be positive: {text!r}", key='moments.order')
    return orders


def _resolve(args):
    from .config import parse_config
    return parse_config(args.command, args.preset, args.config, args.overrides, args.out)


def run_subcommand(args) -> int:
    """Execute the specified subcommand and return its exit code"""
    from . import commands
    from .optim import ABORTED, CONVERGED

    if args.command == 'solve-vp':
        commands.run_solve_vp(_resolve(args), args.params, progress=True)
    elif args.command == 'solve-moments':
        commands.run_solve_moments(_resolve(args), args.params, progress=True)
    elif args.command == 'optimize':
        orders = parse_orders(args.orders)
        status = commands.run_optimize(_resolve(args), orders, progress=True)
        if status == ABORTED:
            return EXIT_NUMERIC
        if status != CONVERGED:
            print(f"Optimization stopped without reaching the gradient tolerance ({status})")
            return EXIT_NOT_CONVERGED
        print("\n✅ Optimization converged")
    elif args.command == 'evaluate':
        commands.run_evaluate(_resolve(args), args.params, args.baseline, progress=True)
    elif args.command == 'plot':
        run_plot(args)
    elif args.command == 'verify':
        return run_verify()
    else:
        raise ValueError(f"Unknown command: {args.command}")
    return EXIT_OK


def run_plot(args) -> None:
    """Run plot subcommand (only grid and control sections are read from the config)"""
    from .commands import run_plot as render
    from .config import build_section, load_flat

    flat = load_flat('plot', args.preset, args.config, args.overrides, args.out)
    grid = build_section(flat, 'grid').build()
    control = build_section(flat, 'control')
    output_dir = Path(flat.get('output.dir', DEFAULT_OUTPUT_DIR))
    render(args.input or output_dir, output_dir, grid, control.wavenumber)


def run_verify() -> int:
    """Run verify subcommand"""
    from .verify import run_properties

    failed = 0
    for result in run_properties():
        mark = "PASS" if result.passed else "FAIL"
        print(f"[{mark}] {result.name}: {result.detail}")
        failed += not result.passed
    if failed:
        print(f"\n{failed} properties failed", file=sys.stderr)
        return EXIT_NUMERIC
    print("\n✅ All properties hold")
    return EXIT_OK


def main() -> int:
    """Main entry point"""
    parser = create_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return 1

    # Numeric and input errors map to exit codes; anything else propagates for debugging
    try:
        return run_subcommand(args)
    except (ConfigError, FormatError, ModelError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as e:
        print(f"Error: {e}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
