"""
Independent eigenvalue oracle.

Shoots the linear first-order system for (y, y[1]) with y[1] = y' + f y:

    y'    = -f y + y[1]
    y[1]' = (-F - lambda) y + f y[1]

and locates eigenvalues from the interior zero count of y plus the angle of
(y, y') at b. No Prufer angle is integrated, so the result cross-checks the
shooting solver.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from sturmasym.core.base_stepper import OdeSystem
from sturmasym.core.errors import BracketNotFoundError, BranchAmbiguityError, ValidationError
from sturmasym.core.estimate import EigenEstimate
from sturmasym.core.potential import PotentialSpec, Regularizer
from sturmasym.core.prufer import (
    BoundaryConditions,
    boundary_f,
    bracket_root,
    check_monotone,
    run_with_steppers,
)

logger = logging.getLogger(__name__)

_RENORMALIZE_LOW = 1e-6
_RENORMALIZE_HIGH = 1e6


@dataclass(frozen=True)
class SystemState:
    """(y, y[1]) at abscissa x."""

    x: float
    y0: float
    y1: float

    @property
    def norm(self) -> float:
        return math.hypot(self.y0, self.y1)


@dataclass(frozen=True)
class ShootingResult:
    """
    End state of one oracle shot.

    Attributes:
        state: (y, y[1]) at b
        zero_count: Sign changes of y in (a, b)
        renormalizations: Times the state was rescaled to unit norm
        derivative_b: y'(b) = y[1](b) - f(b) y(b)
    """

    state: SystemState
    zero_count: int
    renormalizations: int
    derivative_b: float


class QuasiDerivativeSystem(OdeSystem):
    """The linear system for (y, y[1]); rescales itself to stay in range."""

    dimension = 2

    def __init__(self, reg: Regularizer, lam: float):
        self.reg = reg
        self.lam = lam
        self.renormalizations = 0

    def rhs(self, x: float, y: Sequence[float]) -> Tuple[float, ...]:
        if self.reg.is_zero:
            f = F = 0.0
        else:
            f, F = self.reg.f_and_F(x)
        return (-f * y[0] + y[1], (-F - self.lam) * y[0] + f * y[1])

    def rhs_nodes(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.reg.is_zero:
            f = F = np.zeros_like(x)
        else:
            f, F = self.reg.f(x), self.reg.F(x)
        return np.stack([-f * y[:, 0] + y[:, 1], (-F - self.lam) * y[:, 0] + f * y[:, 1]], axis=1)

    def error_scale(self, y: Sequence[float]) -> float:
        return max(math.hypot(y[0], y[1]), 1e-300)

    def post_step(self, x: float, y: Tuple[float, ...]) -> Tuple[float, ...]:
        norm = math.hypot(y[0], y[1])
        if _RENORMALIZE_LOW <= norm <= _RENORMALIZE_HIGH:
            return y
        self.renormalizations += 1
        return (y[0] / norm, y[1] / norm)


def _count_sign_changes(values: np.ndarray) -> int:
    signs = np.sign(values)
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def shoot_system(lam: float, spec: PotentialSpec, reg: Regularizer, bc: BoundaryConditions,
                 tol: float = 1e-10, method: str = "hybrid") -> ShootingResult:
    """
    Integrate the linear system from a to b.

    The start is y(a) = sin(alpha), y'(a) = cos(alpha).

    Raises:
        ValidationError: If lam <= 0
        BudgetExceededError: If the step budget runs out
    """
    if not (math.isfinite(lam) and lam > 0):
        raise ValidationError(f"lambda must be positive and finite, got {lam}")
    system = QuasiDerivativeSystem(reg, lam)
    f_a = boundary_f(reg, spec.a)
    start = (math.sin(bc.alpha), math.cos(bc.alpha) + f_a * math.sin(bc.alpha))
    trajectory = run_with_steppers(system, spec, reg, start, tol, method, math.sqrt(lam))
    y0s = np.asarray([y[0] for y in trajectory.ys])
    # a zero at a itself (alpha = 0) is not interior
    interior = y0s[1:] if bc.alpha == 0 else y0s
    zeros = _count_sign_changes(interior)
    end = trajectory.final
    derivative_b = end[1] - boundary_f(reg, spec.b) * end[0]
    return ShootingResult(
        state=SystemState(x=spec.b, y0=end[0], y1=end[1]),
        zero_count=zeros,
        renormalizations=system.renormalizations,
        derivative_b=derivative_b,
    )


def angle_mismatch(n: int, result: ShootingResult, bc: BoundaryConditions) -> float:
    """
    Unwrapped angle of (y, y') at b minus its target for index n.

    The angle is Z pi + (atan2(y, y') mod pi, taken in (0, pi]) with Z the
    interior zero count; the target is n pi + beta, or (n + 1) pi when beta = 0.
    """
    phi = math.atan2(result.state.y0, result.derivative_b) % math.pi
    if phi == 0.0:
        phi = math.pi
    target = n * math.pi + (bc.beta if bc.beta > 0 else math.pi)
    return result.zero_count * math.pi + phi - target


def oracle_eigenvalue(n: int, spec: PotentialSpec, reg: Regularizer, bc: BoundaryConditions,
                      tol: float = 1e-10, method: str = "hybrid") -> EigenEstimate:
    """
    The n-th eigenvalue from zero counting and the end angle.

    Raises:
        BracketNotFoundError: If the n-th eigenvalue is not positive
        BranchAmbiguityError: If the zero count is inconsistent across the bracket
    """
    if n < 0:
        raise ValidationError(f"eigenvalue index must be >= 0, got {n}")
    try:
        guess = exact_zero_potential_eigen(n, spec.a, spec.b, bc)
    except BracketNotFoundError:
        guess = ((n + 1) * math.pi / spec.length) ** 2
    zero_counts: Dict[float, int] = {}

    def func(lam: float) -> float:
        result = shoot_system(lam, spec, reg, bc, tol, method)
        zero_counts[lam] = result.zero_count
        return angle_mismatch(n, result, bc)

    lo, hi, samples = bracket_root(func, guess)
    check_monotone(samples)
    counts = [zero_counts[lam] for lam, _ in sorted(samples)]
    if any(later < earlier for earlier, later in zip(counts, counts[1:])):
        raise BranchAmbiguityError(f"zero count not monotone across the bracket: {counts}")
    lam = lo if lo == hi else brentq(func, lo, hi, xtol=1e-300,
                                     rtol=max(tol, 4 * np.finfo(float).eps), maxiter=200)
    residual = func(lam)
    if zero_counts[lam] not in (n, n + 1):
        raise BranchAmbiguityError(
            f"eigenfunction for index {n} has {zero_counts[lam]} interior zeros"
        )
    logger.info("oracle n=%d: lambda=%.15g (residual %.2e)", n, lam, residual)
    return EigenEstimate(n=n, lam=lam, method="oracle", residual=residual, order=0,
                         error_bound=abs(residual) * 2.0 * math.sqrt(lam) / spec.length + tol * lam)


def exact_zero_potential_eigen(n: int, a: float, b: float, bc: BoundaryConditions) -> float:
    """
    The n-th eigenvalue of -y'' = lambda y on [a, b] (no potential).

    Dirichlet at both ends gives ((n+1) pi / L)^2; otherwise
    psi_a(omega) + omega L = n pi + t_b(omega) is solved for omega, with psi_a
    and t_b the boundary angles (t_b = pi when beta = 0).

    Raises:
        BracketNotFoundError: If the n-th eigenvalue is not positive
    """
    if n < 0:
        raise ValidationError(f"eigenvalue index must be >= 0, got {n}")
    if not a < b:
        raise ValidationError(f"need a < b, got a={a}, b={b}")
    length = b - a
    if bc.alpha == 0 and bc.beta == 0:
        return ((n + 1) * math.pi / length) ** 2

    def boundary_angle(omega: float, angle: float) -> float:
        return math.atan2(omega * math.sin(angle), math.cos(angle)) % math.pi

    def h(omega: float) -> float:
        t_b = boundary_angle(omega, bc.beta) if bc.beta > 0 else math.pi
        return boundary_angle(omega, bc.alpha) + omega * length - n * math.pi - t_b

    lo = max((n - 1) * math.pi / length, 1e-12 / length)
    hi = (n + 2) * math.pi / length
    if h(lo) >= 0:
        raise BracketNotFoundError(f"eigenvalue {n} of the zero-potential problem is not positive")
    omega = brentq(h, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return omega * omega


__all__ = [
    'QuasiDerivativeSystem',
    'ShootingResult',
    'SystemState',
    'angle_mismatch',
    'exact_zero_potential_eigen',
    'oracle_eigenvalue',
    'shoot_system',
]
