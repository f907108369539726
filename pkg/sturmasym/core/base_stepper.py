"""
Base classes for ODE systems and the steppers that advance them.

All custom steppers must inherit from Stepper and implement advance().
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from sturmasym.core.errors import NonFiniteCoefficientError, ValidationError


class OdeSystem(ABC):
    """
    A first-order system y' = rhs(x, y) with a singular point at x = 0.

    Subclasses provide a scalar right-hand side (used by the Runge-Kutta
    steppers) and a vectorized one (used by the collocation steppers).
    """

    dimension: int = 1

    @abstractmethod
    def rhs(self, x: float, y: Sequence[float]) -> Tuple[float, ...]:
        """
        Evaluate the right-hand side at one point.

        Args:
            x: Abscissa (never 0)
            y: State

        Returns:
            Tuple of derivatives, one per state component
        """
        pass

    @abstractmethod
    def rhs_nodes(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """
        Evaluate the right-hand side at many points.

        Args:
            x: Abscissae, shape (m,)
            y: States, shape (m, dimension)

        Returns:
            Derivatives, shape (m, dimension)
        """
        pass

    def error_scale(self, y: Sequence[float]) -> float:
        """Scale the local error is measured against (1 = absolute)."""
        return 1.0

    def post_step(self, x: float, y: Tuple[float, ...]) -> Tuple[float, ...]:
        """Hook run after every accepted step; may rescale the state."""
        return y


@dataclass
class Trajectory:
    """
    Accepted samples of a stepper run.

    Attributes:
        xs: Abscissae, strictly increasing
        ys: States at xs
        steps: Number of accepted steps
        rejected: Number of rejected steps
    """

    xs: List[float] = field(default_factory=list)
    ys: List[Tuple[float, ...]] = field(default_factory=list)
    steps: int = 0
    rejected: int = 0

    def append(self, x: float, y: Tuple[float, ...]):
        if self.xs and x <= self.xs[-1]:
            return
        self.xs.append(x)
        self.ys.append(tuple(y))

    def extend(self, other: 'Trajectory'):
        for x, y in zip(other.xs, other.ys):
            self.append(x, y)
        self.steps += other.steps
        self.rejected += other.rejected

    @property
    def final(self) -> Tuple[float, ...]:
        return self.ys[-1]


def check_finite(values: Sequence[float], where: float):
    """Raise NonFiniteCoefficientError if any value is NaN or inf."""
    for value in values:
        if not math.isfinite(value):
            raise NonFiniteCoefficientError(f"non-finite value {value} near x = {where:.6g}")


class Stepper(ABC):
    """
    Abstract base class for ODE steppers.

    Attributes:
        tol: Global absolute tolerance over a run of length scale_length
        scale_length: Reference length the tolerance is spread over
        max_steps: Budget of accepted plus rejected steps
        oscillation_scale: Frequency omega of the solution (caps the step)
        covers_singularity: True if the stepper integrates across x = 0 itself
    """

    name = "base"
    covers_singularity = False

    def __init__(self, tol: float, scale_length: float = 1.0, max_steps: int = 2_000_000,
                 oscillation_scale: float = 0.0):
        if not tol > 0:
            raise ValidationError(f"tolerance must be positive, got {tol}")
        if not scale_length > 0:
            raise ValidationError(f"scale length must be positive, got {scale_length}")
        self.tol = tol
        self.scale_length = scale_length
        self.max_steps = max_steps
        self.oscillation_scale = oscillation_scale

    @property
    def max_step(self) -> float:
        """Largest step: a quarter of the half-period pi/omega."""
        if self.oscillation_scale > 0:
            return min(self.scale_length / 8.0, math.pi / (4.0 * self.oscillation_scale))
        return self.scale_length / 8.0

    @abstractmethod
    def advance(self, system: OdeSystem, x0: float, x1: float,
                y0: Sequence[float]) -> Trajectory:
        """
        Integrate system from x0 to x1.

        Args:
            system: The ODE system
            x0: Start (x0 < x1)
            x1: End
            y0: State at x0

        Returns:
            Trajectory starting with (x0, y0) and ending at x1

        Raises:
            BudgetExceededError: If the step budget runs out
            NonFiniteCoefficientError: If the right-hand side is not finite
        """
        pass

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(tol={self.tol:g})"
