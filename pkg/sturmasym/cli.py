"""
Command-line driver.

    sturmasym eigen --C 1 --K 1 --a -1 --b 1 --n-max 5
    sturmasym asym --C 1 --K 1 --n-min 10 --n-max 80 --order-N 1 --format json --out asym.json

Results go to stdout (or --out); logs and error records go to stderr.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

from sturmasym.core.config import COMMANDS, FORMATS, METHODS, STEPPER_NAMES, RunConfig
from sturmasym.core.errors import SturmAsymError, exit_code_for
from sturmasym.impl.default_runner import DefaultStudyRunner
from sturmasym.impl.results_io import ResultsWriter

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    problem = common.add_argument_group('problem')
    problem.add_argument('--C', type=float, default=0.0, help='coupling constant')
    problem.add_argument('--K', type=float, default=1.0, help='singularity exponent in [1, 2)')
    problem.add_argument('--a', type=float, default=-1.0, help='left endpoint')
    problem.add_argument('--b', type=float, default=1.0, help='right endpoint')
    problem.add_argument('--alpha', type=float, default=0.0, help='boundary angle at a, in [0, pi)')
    problem.add_argument('--beta', type=float, default=0.0, help='boundary angle at b, in [0, pi)')
    problem.add_argument('--chain-depth', type=int, default=None, help='regularizer chain depth')

    solver = common.add_argument_group('solver')
    solver.add_argument('--n-min', type=int, default=0)
    solver.add_argument('--n-max', type=int, default=5)
    solver.add_argument('--order-N', dest='order', type=int, default=1)
    solver.add_argument('--tol', type=float, default=1e-10)
    solver.add_argument('--method', choices=METHODS, default='shooting')
    solver.add_argument('--stepper', choices=STEPPER_NAMES, default='hybrid')
    solver.add_argument('--target', choices=('leading', 'exact'), default='leading')
    solver.add_argument('--ladder-start', type=float, default=100.0)
    solver.add_argument('--ladder-factor', type=float, default=10.0)
    solver.add_argument('--ladder-count', type=int, default=5)

    output = common.add_argument_group('output')
    output.add_argument('--format', dest='fmt', choices=FORMATS, default='csv')
    output.add_argument('--out', default=None, help='output file (default: stdout)')
    output.add_argument('-v', '--verbose', action='store_true')

    parser = argparse.ArgumentParser(
        prog='sturmasym',
        description='Eigenvalues of -y" + C|x|^-K y = lambda y and their asymptotic expansion.',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = vars(args).copy()
    values.pop('verbose', None)
    return RunConfig.from_dict(values)


def _report(error: BaseException) -> int:
    code = exit_code_for(error)
    record = {'error': type(error).__name__, 'message': str(error), 'exit_code': code}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        Exit status: 0 success, 2 invalid input, 3 budget exhausted, 4 inconsistency
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )
    try:
        config = config_from_args(args)
        rows = DefaultStudyRunner(config).run()
        writer = ResultsWriter()
        if config.out:
            writer.save_to_file(config, rows, config.out)
        else:
            sys.stdout.write(writer.render(config, rows))
    except SturmAsymError as error:
        logger.debug("run failed", exc_info=True)
        return _report(error)
    except Exception as error:
        logger.debug("unexpected failure", exc_info=True)
        return _report(error)
    return 0


if __name__ == '__main__':
    sys.exit(main())
