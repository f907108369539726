"""
Classical RK4 on a fixed, geometrically graded mesh.

A slow reference used to cross-check the adaptive steppers.
"""

import logging
from typing import Sequence

from sturmasym.core.base_stepper import OdeSystem, Stepper, Trajectory, check_finite
from sturmasym.core.errors import BudgetExceededError
from sturmasym.core.quadrature import graded_breakpoints

logger = logging.getLogger(__name__)


class FixedMeshRK4Stepper(Stepper):
    """RK4 with one step per mesh cell; cells grade by 0.97 toward 0."""

    name = "reference"

    def __init__(self, tol: float, scale_length: float = 1.0, max_steps: int = 2_000_000,
                 oscillation_scale: float = 0.0, grading_ratio: float = 0.97,
                 cells_per_step: int = 16):
        super().__init__(tol, scale_length, max_steps, oscillation_scale)
        self.grading_ratio = grading_ratio
        self.cells_per_step = cells_per_step

    def advance(self, system: OdeSystem, x0: float, x1: float,
                y0: Sequence[float]) -> Trajectory:
        cap = min(self.max_step / self.cells_per_step, self.scale_length / 2000.0)
        pieces, _ = graded_breakpoints(x0, x1, ratio=self.grading_ratio, width_cap=cap)
        mesh = pieces[0]
        if mesh.size - 1 > self.max_steps:
            raise BudgetExceededError(f"reference mesh needs {mesh.size - 1} steps")
        trajectory = Trajectory()
        y = tuple(y0)
        trajectory.append(x0, y)
        dim = len(y)
        for xl, xr in zip(mesh[:-1].tolist(), mesh[1:].tolist()):
            h = xr - xl
            k1 = system.rhs(xl, y)
            k2 = system.rhs(xl + h / 2, [y[i] + h / 2 * k1[i] for i in range(dim)])
            k3 = system.rhs(xl + h / 2, [y[i] + h / 2 * k2[i] for i in range(dim)])
            k4 = system.rhs(xr, [y[i] + h * k3[i] for i in range(dim)])
            y = tuple(y[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(dim))
            check_finite(y, xl)
            y = system.post_step(xr, y)
            trajectory.append(xr, y)
            trajectory.steps += 1
        logger.debug("reference: %d steps on [%g, %g]", trajectory.steps, x0, x1)
        return trajectory
