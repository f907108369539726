"""
Adaptive Cash-Karp 5(4) Runge-Kutta stepper.

Used away from the singular point, where the right-hand side is smooth.
"""

import logging
import math
from typing import Sequence

from sturmasym.core.base_stepper import OdeSystem, Stepper, Trajectory, check_finite
from sturmasym.core.errors import BudgetExceededError

logger = logging.getLogger(__name__)


class CashKarpStepper(Stepper):
    """
    Cash-Karp pair: six stages, fifth order propagation with an embedded
    fourth order error estimate.

    The local error of a step of length h is held below tol * h / scale_length,
    so the accumulated error over the run stays below tol.
    """

    name = "hybrid"

    #intermediate evaluation points
    eval_stages = [0.0, 1/5, 3/10, 3/5, 1, 7/8]

    #butcher table
    BT = {
        0: [       1/5],
        1: [      3/40,    9/40],
        2: [      3/10,   -9/10,       6/5],
        3: [    -11/54,     5/2,    -70/27,        35/27],
        4: [1631/55296, 175/512, 575/13824, 44275/110592, 253/4096],
    }

    #fifth order weights
    B5 = [37/378, 0, 250/621, 125/594, 0, 512/1771]

    #coefficients for local truncation error estimate
    TR = [-277/64512, 0, 6925/370944, -6925/202752, -277/14336, 277/7084]

    def _step(self, system: OdeSystem, x: float, y: Sequence[float], h: float):
        dim = len(y)
        slopes = [system.rhs(x, y)]
        for stage, row in self.BT.items():
            trial = [
                y[i] + h * sum(a * k[i] for a, k in zip(row, slopes))
                for i in range(dim)
            ]
            slopes.append(system.rhs(x + self.eval_stages[stage + 1] * h, trial))
        y_new = tuple(
            y[i] + h * sum(b * k[i] for b, k in zip(self.B5, slopes)) for i in range(dim)
        )
        error = max(abs(h * sum(t * k[i] for t, k in zip(self.TR, slopes))) for i in range(dim))
        return y_new, error

    def advance(self, system: OdeSystem, x0: float, x1: float,
                y0: Sequence[float]) -> Trajectory:
        trajectory = Trajectory()
        x, y = x0, tuple(y0)
        trajectory.append(x, y)
        h = min(self.max_step, (x1 - x0) / 16.0)
        per_unit = self.tol / self.scale_length
        budget = self.max_steps

        while x < x1:
            if trajectory.steps + trajectory.rejected >= budget:
                raise BudgetExceededError(
                    f"{self.name} stepper exhausted {budget} steps at x = {x:.6g}",
                    best_value=y[0],
                )
            h = min(h, x1 - x)
            y_new, error = self._step(system, x, y, h)
            check_finite(y_new, x)
            allowed = per_unit * h * system.error_scale(y) + 1e-300
            ratio = error / allowed
            tiny = h <= 4 * math.ulp(max(abs(x), abs(x + h)))
            if ratio <= 1.0 or tiny:
                x = x + h if x1 - x > h else x1
                y = system.post_step(x, y_new)
                trajectory.append(x, y)
                trajectory.steps += 1
            else:
                trajectory.rejected += 1
            factor = 0.9 * ratio ** -0.2 if ratio > 0 else 5.0
            h = min(self.max_step, h * min(5.0, max(0.2, factor)))

        logger.debug("%s: %d steps, %d rejected on [%g, %g]",
                     self.name, trajectory.steps, trajectory.rejected, x0, x1)
        return trajectory
