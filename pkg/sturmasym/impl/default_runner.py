"""
Default implementation of the command-line studies.

Each subcommand turns a RunConfig into a list of result rows (plain dicts).
Independent solves run on a thread pool; rows are sorted by key before they
are returned, so output does not depend on completion order.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional

from sturmasym.core.asymptotic import asym_eigenvalue, expansion_rhs
from sturmasym.core.config import RunConfig, resolve_threads
from sturmasym.core.oracle import oracle_eigenvalue
from sturmasym.core.potential import (
    Regularizer,
    build_regularizer,
    check_conditions,
    minimal_order,
    require_conditions,
)
from sturmasym.core.prufer import integrate_theta, solve_eigenvalue

logger = logging.getLogger(__name__)

Row = Dict[str, Any]


class DefaultStudyRunner:
    """
    Executes one RunConfig.

    Attributes:
        config: The validated run configuration
        threads: Worker count for independent solves
    """

    def __init__(self, config: RunConfig, threads: Optional[int] = None):
        self.config = config
        self.threads = threads if threads is not None else resolve_threads()
        self.spec = config.potential
        self.bc = config.boundary
        self._regularizer: Optional[Regularizer] = None
        self._commands: Dict[str, Callable[[], List[Row]]] = {
            'eigen': self.cmd_eigen,
            'asym': self.cmd_asym,
            'sweep': self.cmd_sweep,
            'dump-regularizer': self.cmd_dump_regularizer,
            'check-conditions': self.cmd_check_conditions,
        }

    @property
    def regularizer(self) -> Regularizer:
        if self._regularizer is None:
            self._regularizer = build_regularizer(self.spec, self.config.chain_depth)
        return self._regularizer

    def run(self) -> List[Row]:
        logger.info("Running %s with %d worker(s)", self.config.command, self.threads)
        return self._commands[self.config.command]()

    def _map(self, func: Callable[[Any], Row], items: Iterable[Any], key: str) -> List[Row]:
        items = list(items)
        if self.threads <= 1 or len(items) <= 1:
            rows = [func(item) for item in items]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                rows = list(pool.map(func, items))
        return sorted(rows, key=lambda row: row[key])

    def _direct(self, n: int):
        config = self.config
        if config.method == 'oracle':
            return oracle_eigenvalue(n, self.spec, self.regularizer, self.bc, config.tol, config.stepper)
        return solve_eigenvalue(n, self.spec, self.regularizer, self.bc, config.tol, config.stepper)

    def cmd_eigen(self) -> List[Row]:
        """Rows {n, lambda, method, residual}."""
        def solve(n: int) -> Row:
            estimate = self._direct(n)
            return {'n': n, 'lambda': estimate.lam, 'method': estimate.method,
                    'residual': estimate.residual}

        # built once here so worker threads share the cached regularizer
        reg = self.regularizer
        logger.debug("regularizer depth %d for %d index(es)", reg.chain_depth, len(self.config.indices))
        return self._map(solve, self.config.indices, 'n')

    def cmd_asym(self) -> List[Row]:
        """Rows {n, lambda_asym_N, lambda_exact, sqrtLambdaError, scaledError}."""
        config = self.config
        require_conditions(self.regularizer, config.order)

        def compare(n: int) -> Row:
            asym = asym_eigenvalue(n, config.order, self.spec, self.regularizer, self.bc,
                                   target=config.target)
            exact = solve_eigenvalue(n, self.spec, self.regularizer, self.bc, config.tol, config.stepper)
            gap = abs(asym.sqrt_lam - exact.sqrt_lam)
            return {
                'n': n,
                'lambda_asym_N': asym.lam,
                'lambda_exact': exact.lam,
                'sqrtLambdaError': gap,
                'scaledError': gap * exact.lam ** (config.order / 2.0),
            }

        return self._map(compare, config.indices, 'n')

    def cmd_sweep(self) -> List[Row]:
        """Rows {lambda, thetaB, expansion_rhs_N, residual} over the lambda ladder."""
        config = self.config
        require_conditions(self.regularizer, config.order)

        def sample(lam: float) -> Row:
            solution = integrate_theta(lam, self.spec, self.regularizer, self.bc, config.tol, config.stepper)
            rhs = expansion_rhs(config.order, lam, self.spec, self.regularizer, self.bc)
            residual = solution.theta_b - solution.theta_a - math.sqrt(lam) * self.spec.length - rhs
            return {'lambda': lam, 'thetaB': solution.theta_b, 'expansion_rhs_N': rhs,
                    'residual': residual}

        return self._map(sample, config.ladder, 'lambda')

    def cmd_dump_regularizer(self) -> List[Row]:
        """One row per closed-form term of f and F."""
        reg = self.regularizer
        rows = []
        for label, terms in (('f', reg.f_terms), ('F', reg.F_terms)):
            for term in terms:
                rows.append({'function': label, **term.to_dict(), 'chainDepth': reg.chain_depth})
        return rows

    def cmd_check_conditions(self) -> List[Row]:
        """One row per product of the integrability hypotheses."""
        report = check_conditions(self.regularizer, self.config.order)
        least = minimal_order(self.regularizer)
        return [
            {**witness.to_dict(), 'order': report.order, 'holds': report.holds,
             'minimalOrder': least if least is not None else -1}
            for witness in report.witnesses
        ]
