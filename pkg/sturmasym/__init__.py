"""
SturmAsym - eigenvalues of Sturm-Liouville problems with an interior singularity

Solves -y'' + C|x|^-K y = lambda y on [a, b] (a < 0 < b, 1 <= K < 2) with
separated boundary conditions, using a regularized Prufer angle whose
coefficients are integrable at the singular point.

Core Features:
- Closed-form regularizer f, F built by an exact antiderivative chain
- Eigenvalues by Prufer shooting and by an independent linear-system oracle
- Picard approximants of the Prufer angle and the order-N asymptotic expansion
- Integrability checks for the expansion, by exponent arithmetic
- Command-line studies with CSV / JSON output

Example:
    >>> from sturmasym import SturmAsymEngine
    >>>
    >>> engine = SturmAsymEngine(C=1.0, K=1.0, a=-1.0, b=1.0)
    >>> engine.eigenvalue(0).lam
    >>> engine.asymptotic_eigenvalue(20, N=1).lam
"""

from sturmasym.core.asymptotic import asym_eigenvalue, case_target, expansion_rhs, theta_iterate
from sturmasym.core.base_stepper import OdeSystem, Stepper
from sturmasym.core.engine import SturmAsymEngine
from sturmasym.core.errors import SturmAsymError
from sturmasym.core.estimate import EigenEstimate
from sturmasym.core.oracle import exact_zero_potential_eigen, oracle_eigenvalue
from sturmasym.core.potential import PotentialSpec, Regularizer, build_regularizer, check_conditions
from sturmasym.core.prufer import BoundaryConditions, integrate_theta, solve_eigenvalue

__version__ = "0.1.0"
__author__ = "SturmAsym Contributors"

__all__ = [
    'SturmAsymEngine',
    'Stepper',
    'OdeSystem',
    'SturmAsymError',
    'PotentialSpec',
    'Regularizer',
    'BoundaryConditions',
    'EigenEstimate',
    'build_regularizer',
    'check_conditions',
    'integrate_theta',
    'solve_eigenvalue',
    'oracle_eigenvalue',
    'exact_zero_potential_eigen',
    'theta_iterate',
    'expansion_rhs',
    'case_target',
    'asym_eigenvalue',
]
