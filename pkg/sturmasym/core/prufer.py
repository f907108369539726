"""
Regularized Prufer angle and the shooting eigenvalue solver.

With the quasi-derivative y[1] = y' + f y and omega = sqrt(lambda), the
angle defined by tan(theta) = omega y / y[1] obeys

    theta' = omega - f sin(2 theta) + F sin^2(theta) / omega

whose coefficients are integrable at 0. The solver integrates the
deviation u = theta - theta(a) - omega (x - a), which stays O(1) even for
large lambda.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Any, Dict

import numpy as np
from scipy.optimize import brentq

from sturmasym.core.base_stepper import OdeSystem, Trajectory
from sturmasym.core.errors import (
    BracketNotFoundError,
    NonMonotoneMismatchError,
    ValidationError,
)
from sturmasym.core.estimate import EigenEstimate
from sturmasym.core.potential import PotentialSpec, Regularizer
from sturmasym.steppers import STEPPERS, PicardPanelStepper

logger = logging.getLogger(__name__)

# L1 mass of |f| + |F| handed to the Picard panels around 0
INNER_MASS = 0.25


@dataclass(frozen=True)
class BoundaryConditions:
    """
    Separated conditions y(a)cos(alpha) - y'(a)sin(alpha) = 0 and likewise at b.

    Attributes:
        alpha: Angle at a, 0 <= alpha < pi
        beta: Angle at b, 0 <= beta < pi
    """

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ('alpha', 'beta'):
            value = getattr(self, name)
            if not (math.isfinite(value) and 0.0 <= value < math.pi):
                raise ValidationError(f"{name} must lie in [0, pi), got {value}")

    @property
    def case(self) -> int:
        """1: both Dirichlet, 2: Dirichlet at a only, 3: Dirichlet at b only, 4: neither."""
        if self.alpha == 0:
            return 1 if self.beta == 0 else 2
        return 3 if self.beta == 0 else 4

    def winding(self, n: int) -> int:
        """Multiple of pi that theta(b) - target must equal for index n."""
        return n + 1 if self.beta == 0 else n

    def to_dict(self) -> Dict[str, Any]:
        return {'alpha': self.alpha, 'beta': self.beta}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BoundaryConditions':
        return cls(alpha=float(data['alpha']), beta=float(data['beta']))


@dataclass(frozen=True, eq=False)
class PruferSolution:
    """
    Sampled Prufer angle for one lambda.

    Attributes:
        lam: Spectral parameter
        theta_a: Initial angle
        theta_b: Angle at b
        xs: Sample abscissae, strictly increasing, from a to b
        thetas: Angle at xs
        method: Stepper name
        tol: Tolerance the run was made with
        steps: Accepted steps
        winding: Whole multiples of pi swept by theta up to b
    """

    lam: float
    theta_a: float
    theta_b: float
    xs: np.ndarray
    thetas: np.ndarray
    method: str
    tol: float
    steps: int
    winding: int

    def theta_at(self, x) -> np.ndarray:
        """Linear interpolation between samples."""
        return np.interp(x, self.xs, self.thetas)


def _check_lam(lam: float):
    if not (math.isfinite(lam) and lam > 0):
        raise ValidationError(f"lambda must be positive and finite, got {lam}")


def boundary_f(reg: Regularizer, x: float) -> float:
    """f at an endpoint (0 for the zero regularizer)."""
    return 0.0 if reg.is_zero else float(reg.f(x))


def _angle(lam: float, angle: float, f_value: float) -> float:
    if angle == 0:
        return 0.0
    omega = math.sqrt(lam)
    return math.atan2(omega * math.sin(angle), math.cos(angle) + f_value * math.sin(angle)) % math.pi


def theta_a(lam: float, bc: BoundaryConditions, f_a: float = 0.0) -> float:
    """
    Initial Prufer angle in [0, pi).

    Args:
        lam: Spectral parameter (> 0)
        bc: Boundary conditions
        f_a: f(a)
    """
    _check_lam(lam)
    return _angle(lam, bc.alpha, f_a)


def theta_target_b(lam: float, bc: BoundaryConditions, f_b: float = 0.0) -> float:
    """Angle in [0, pi) that theta(b) must match modulo pi."""
    _check_lam(lam)
    return _angle(lam, bc.beta, f_b)


class AngleSystem(OdeSystem):
    """u' = -f sin(2 theta) + F sin^2(theta) / omega with theta = theta_a + omega (x - a) + u."""

    def __init__(self, reg: Regularizer, a: float, start: float, omega: float):
        self.reg = reg
        self.a = a
        self.start = start
        self.omega = omega

    def base(self, x):
        return self.start + self.omega * (x - self.a)

    def rhs(self, x: float, y: Sequence[float]) -> Tuple[float, ...]:
        if self.reg.is_zero:
            return (0.0,)
        f, F = self.reg.f_and_F(x)
        theta = self.start + self.omega * (x - self.a) + y[0]
        s = math.sin(theta)
        return (-2.0 * f * s * math.cos(theta) + F * s * s / self.omega,)

    def rhs_nodes(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.reg.is_zero:
            return np.zeros_like(y)
        theta = self.base(x) + y[:, 0]
        values = -self.reg.f(x) * np.sin(2.0 * theta) + self.reg.F(x) * np.sin(theta) ** 2 / self.omega
        return values[:, None]


def _stepper_kwargs(tol: float, spec: PotentialSpec, omega: float) -> Dict[str, Any]:
    return {'tol': tol, 'scale_length': spec.length, 'oscillation_scale': omega}


def run_with_steppers(system: OdeSystem, spec: PotentialSpec, reg: Regularizer, y0: Sequence[float],
                      tol: float, method: str, omega: float) -> Trajectory:
    """
    Integrate a system from a to b, splitting off the neighbourhood of 0.

    Away from 0 the registered stepper for method is used; on (-delta, delta),
    where the mass of |f| + |F| is at most INNER_MASS, graded Picard panels
    take over. They skip the gap (-floor, floor), whose mass is below tol/4.
    Steppers that cover the singular point run on [a, b] directly.

    Raises:
        ValidationError: If method is not registered
    """
    if method not in STEPPERS:
        raise ValidationError(f"unknown stepper '{method}', choose from {sorted(STEPPERS)}")
    stepper_cls = STEPPERS[method]
    scale = min(1.0, omega)
    kwargs = _stepper_kwargs(tol, spec, omega)

    if reg.is_zero:
        return stepper_cls(**kwargs).advance(system, spec.a, spec.b, y0)
    if stepper_cls.covers_singularity:
        floor = reg.inner_radius(1e-2 * tol * scale, cap=0.25 * min(-spec.a, spec.b))
        return stepper_cls(floor=floor, **kwargs).advance(system, spec.a, spec.b, y0)

    delta = reg.inner_radius(INNER_MASS, cap=0.5 * min(-spec.a, spec.b))
    floor = reg.inner_radius(0.25 * tol * scale, cap=0.5 * delta)
    kwargs['tol'] = 0.5 * tol
    outer = stepper_cls(**kwargs)
    inner = PicardPanelStepper(tol=0.25 * tol, scale_length=2.0 * delta,
                               oscillation_scale=omega, floor=floor)
    logger.debug("stepping %s: delta %.3e, floor %.3e", method, delta, floor)

    trajectory = outer.advance(system, spec.a, -delta, y0)
    trajectory.extend(inner.advance(system, -delta, delta, trajectory.final))
    trajectory.extend(outer.advance(system, delta, spec.b, trajectory.final))
    return trajectory


def integrate_theta(lam: float, spec: PotentialSpec, reg: Regularizer, bc: BoundaryConditions,
                    tol: float = 1e-10, method: str = "hybrid") -> PruferSolution:
    """
    Integrate the regularized Prufer equation from a to b.

    Args:
        lam: Spectral parameter (> 0)
        spec: Problem instance
        reg: Regularizer of spec
        bc: Boundary conditions
        tol: Absolute tolerance on theta(b)
        method: Registered stepper name ("hybrid", "spectral", "reference")

    Returns:
        PruferSolution with samples from a to b

    Raises:
        ValidationError: If lam <= 0 or method is unknown
        BudgetExceededError: If the step budget runs out
        NonFiniteCoefficientError: If the right-hand side is not finite
    """
    _check_lam(lam)
    if not tol > 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    omega = math.sqrt(lam)
    start = theta_a(lam, bc, boundary_f(reg, spec.a))
    system = AngleSystem(reg, spec.a, start, omega)

    trajectory = run_with_steppers(system, spec, reg, (0.0,), tol, method, omega)
    xs = np.asarray(trajectory.xs)
    thetas = system.base(xs) + np.asarray([y[0] for y in trajectory.ys])
    return PruferSolution(
        lam=lam,
        theta_a=start,
        theta_b=float(thetas[-1]),
        xs=xs,
        thetas=thetas,
        method=method,
        tol=tol,
        steps=trajectory.steps,
        winding=int(math.floor(thetas[-1] / math.pi)),
    )


def mismatch(n: int, lam: float, spec: PotentialSpec, reg: Regularizer, bc: BoundaryConditions,
             tol: float = 1e-10, method: str = "hybrid") -> float:
    """
    D(lambda) = theta(b) - target_b - k pi, with k = n + 1 if beta = 0 else n.

    Increasing in lambda; the n-th eigenvalue is its zero.
    """
    if n < 0:
        raise ValidationError(f"eigenvalue index must be >= 0, got {n}")
    solution = integrate_theta(lam, spec, reg, bc, tol, method)
    target = theta_target_b(lam, bc, boundary_f(reg, spec.b))
    return solution.theta_b - target - bc.winding(n) * math.pi


def bracket_root(func: Callable[[float], float], guess: float, *, max_doublings: int = 60,
                 min_fraction: float = 1e-6) -> Tuple[float, float, List[Tuple[float, float]]]:
    """
    Find lo < hi with func(lo) <= 0 <= func(hi) by doubling or halving from guess.

    Returns:
        (lo, hi, samples), samples being every (lambda, value) evaluated

    Raises:
        BracketNotFoundError: If no sign change is found in range
    """
    samples: List[Tuple[float, float]] = []

    def sample(lam: float) -> float:
        value = func(lam)
        samples.append((lam, value))
        return value

    value = sample(guess)
    lo = hi = guess
    if value == 0:
        return lo, hi, samples
    if value < 0:
        for _ in range(max_doublings):
            hi *= 2.0
            if sample(hi) >= 0:
                return lo, hi, samples
            lo = hi
        raise BracketNotFoundError(f"no sign change below lambda = {hi:.6g}")
    smallest = guess * min_fraction
    while True:
        lo *= 0.5
        if lo < smallest:
            raise BracketNotFoundError(
                f"no positive eigenvalue found down to lambda = {smallest:.3g}"
            )
        if sample(lo) <= 0:
            return lo, hi, samples
        hi = lo


def check_monotone(samples: List[Tuple[float, float]]):
    """Raise NonMonotoneMismatchError if the sample signs are out of order in lambda."""
    signs = [np.sign(value) for _, value in sorted(samples)]
    if any(later < earlier for earlier, later in zip(signs, signs[1:])):
        raise NonMonotoneMismatchError(
            "mismatch sign is not monotone in lambda: "
            + ", ".join(f"{lam:.6g}:{value:+.3e}" for lam, value in sorted(samples))
        )


def solve_eigenvalue(n: int, spec: PotentialSpec, reg: Regularizer, bc: BoundaryConditions,
                     tol: float = 1e-10, method: str = "hybrid",
                     guess: Optional[float] = None) -> EigenEstimate:
    """
    The n-th eigenvalue by shooting on the Prufer mismatch.

    Args:
        n: Index, n >= 0
        spec: Problem instance
        reg: Regularizer
        bc: Boundary conditions
        tol: Integration tolerance; lambda is resolved to about the same relative accuracy
        method: Stepper name
        guess: Starting lambda (default: the zero-potential Dirichlet value)

    Raises:
        BracketNotFoundError: If the n-th eigenvalue is not positive
        NonMonotoneMismatchError: If the mismatch is not monotone across the bracket
    """
    if n < 0:
        raise ValidationError(f"eigenvalue index must be >= 0, got {n}")
    guess = guess or ((n + 1) * math.pi / spec.length) ** 2

    def func(lam: float) -> float:
        return mismatch(n, lam, spec, reg, bc, tol, method)

    lo, hi, samples = bracket_root(func, guess)
    check_monotone(samples)
    if lo == hi:
        lam = lo
    else:
        lam = brentq(func, lo, hi, xtol=1e-300, rtol=max(tol, 4 * np.finfo(float).eps), maxiter=200)
    residual = func(lam)
    # d(theta(b))/d(lambda) is about L / (2 omega)
    error_bound = abs(residual) * 2.0 * math.sqrt(lam) / spec.length + tol * lam
    logger.info("shooting n=%d: lambda=%.15g (residual %.2e, %d bracket samples)",
                n, lam, residual, len(samples))
    return EigenEstimate(n=n, lam=lam, method="shooting", residual=residual,
                         order=0, error_bound=error_bound)


__all__ = [
    'AngleSystem',
    'BoundaryConditions',
    'PruferSolution',
    'boundary_f',
    'bracket_root',
    'check_monotone',
    'integrate_theta',
    'mismatch',
    'run_with_steppers',
    'solve_eigenvalue',
    'theta_a',
    'theta_target_b',
]
