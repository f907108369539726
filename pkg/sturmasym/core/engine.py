"""
SturmAsym engine - main API entry point.

Bundles one problem instance with its regularizer and exposes the solvers.
"""

import logging
from typing import Dict, List, Optional, Type

from sturmasym.core.asymptotic import asym_eigenvalue, expansion_rhs, theta_iterates
from sturmasym.core.base_stepper import Stepper
from sturmasym.core.config import RunConfig
from sturmasym.core.estimate import EigenEstimate
from sturmasym.core.oracle import oracle_eigenvalue
from sturmasym.core.potential import (
    ConditionReport,
    PotentialSpec,
    Regularizer,
    build_regularizer,
    check_conditions,
)
from sturmasym.core.prufer import BoundaryConditions, PruferSolution, integrate_theta, solve_eigenvalue
from sturmasym.steppers import STEPPERS

logger = logging.getLogger(__name__)


class SturmAsymEngine:
    """
    Main SturmAsym class.

    Example:
        >>> engine = SturmAsymEngine(C=1.0, K=1.0, a=-1.0, b=1.0)
        >>> engine.eigenvalue(0).lam
        >>> engine.asymptotic_eigenvalue(20, N=1).lam
    """

    def __init__(self, C: float = 0.0, K: float = 1.0, a: float = -1.0, b: float = 1.0,
                 alpha: float = 0.0, beta: float = 0.0, tol: float = 1e-10,
                 chain_depth: Optional[int] = None):
        """
        Initialize the engine.

        Args:
            C: Coupling constant
            K: Singularity exponent, 1 <= K < 2
            a: Left endpoint
            b: Right endpoint
            alpha: Boundary angle at a
            beta: Boundary angle at b
            tol: Default solver tolerance
            chain_depth: Regularizer depth override

        Raises:
            ValidationError: If any parameter is out of range
        """
        self.spec = PotentialSpec(C=C, K=K, a=a, b=b)
        self.bc = BoundaryConditions(alpha=alpha, beta=beta)
        self.tol = tol
        self.regularizer: Regularizer = build_regularizer(self.spec, chain_depth)

    def register_stepper(self, name: str, stepper_class: Type[Stepper]):
        """
        Register a stepper for the region away from the singular point.

        The registry is shared: once registered, name is accepted as the
        method of every Prufer and oracle run.

        Args:
            name: Method name
            stepper_class: Stepper subclass

        Raises:
            TypeError: If stepper_class does not inherit from Stepper
        """
        if not (isinstance(stepper_class, type) and issubclass(stepper_class, Stepper)):
            raise TypeError(f"{stepper_class} must inherit from Stepper")
        STEPPERS[name] = stepper_class
        logger.info("Registered stepper '%s' (%s)", name, stepper_class.__name__)

    def get_registered_steppers(self) -> List[str]:
        return sorted(STEPPERS)

    def theta(self, lam: float, method: str = "hybrid") -> PruferSolution:
        return integrate_theta(lam, self.spec, self.regularizer, self.bc, self.tol, method)

    def eigenvalue(self, n: int, method: str = "shooting", stepper: str = "hybrid") -> EigenEstimate:
        """
        The n-th eigenvalue by shooting or by the oracle.

        Args:
            n: Index
            method: "shooting" or "oracle"
            stepper: Stepper name
        """
        if method == "oracle":
            return oracle_eigenvalue(n, self.spec, self.regularizer, self.bc, self.tol, stepper)
        return solve_eigenvalue(n, self.spec, self.regularizer, self.bc, self.tol, stepper)

    def asymptotic_eigenvalue(self, n: int, N: int = 1, target: str = "leading") -> EigenEstimate:
        return asym_eigenvalue(n, N, self.spec, self.regularizer, self.bc, target=target)

    def expansion(self, N: int, lam: float) -> float:
        return expansion_rhs(N, lam, self.spec, self.regularizer, self.bc)

    def approximants(self, J: int, lam: float):
        return theta_iterates(J, lam, self.spec, self.regularizer, self.bc)

    def conditions(self, N: int) -> ConditionReport:
        return check_conditions(self.regularizer, N)

    def run(self, config: RunConfig) -> List[Dict]:
        """
        Execute a CLI-style study.

        Args:
            config: Run configuration

        Returns:
            Result rows
        """
        # Import here to avoid circular dependency
        from sturmasym.impl.default_runner import DefaultStudyRunner

        return DefaultStudyRunner(config).run()
