"""
Chebyshev collocation marching (spectral Picard).

Each panel holds Chebyshev-Lobatto nodes; the state is found as the fixed
point of Y = y_left + h S rhs(X, Y) with the spectral integration matrix S.
Panels are capped at a quarter period of the oscillation and split when the
iteration stalls or the right-hand side is under-resolved. This keeps the
cost per unit length independent of tolerance, which suits large lambda.
"""

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from sturmasym.core.base_stepper import OdeSystem, Stepper, Trajectory, check_finite
from sturmasym.core.errors import BudgetExceededError
from sturmasym.core.quadrature import chebyshev_tools, graded_breakpoints

logger = logging.getLogger(__name__)


class ChebyshevPicardStepper(Stepper):
    """Spectral collocation stepper covering the singular point itself."""

    name = "spectral"
    covers_singularity = True

    def __init__(self, tol: float, scale_length: float = 1.0, max_steps: int = 2_000_000,
                 oscillation_scale: float = 0.0, floor: float = 0.0, degree: int = 20,
                 max_iter: int = 40):
        super().__init__(tol, scale_length, max_steps, oscillation_scale)
        self.floor = floor
        self.degree = degree
        self.max_iter = max_iter

    @property
    def max_step(self) -> float:
        if self.oscillation_scale > 0:
            return min(self.scale_length / 8.0, math.pi / (2.0 * self.oscillation_scale))
        return self.scale_length / 8.0

    def advance(self, system: OdeSystem, x0: float, x1: float,
                y0: Sequence[float]) -> Trajectory:
        pieces, _ = graded_breakpoints(x0, x1, ratio=0.5, floor=self.floor, width_cap=self.max_step)
        t, smat, vinv = chebyshev_tools(self.degree)
        trajectory = Trajectory()
        y = np.asarray(y0, dtype=float)
        trajectory.append(x0, tuple(y))

        for piece in pieces:
            pending: List[Tuple[float, float]] = list(zip(piece[:-1].tolist(), piece[1:].tolist()))
            pending.reverse()
            while pending:
                if trajectory.steps + trajectory.rejected >= self.max_steps:
                    raise BudgetExceededError(
                        f"spectral stepper exhausted {self.max_steps} panels",
                        best_value=float(y[0]),
                    )
                xl, xr = pending.pop()
                accepted, values = self._panel(system, xl, xr, y, t, smat, vinv)
                if not accepted:
                    mid = 0.5 * (xl + xr)
                    pending.extend([(mid, xr), (xl, mid)])
                    trajectory.rejected += 1
                    continue
                xs = 0.5 * (xl + xr) + 0.5 * (xr - xl) * t
                xs[-1] = xr
                for x, row in zip(xs[1:], values[1:]):
                    trajectory.append(float(x), tuple(row))
                y = np.asarray(system.post_step(xr, tuple(values[-1])), dtype=float)
                if trajectory.ys:
                    trajectory.ys[-1] = tuple(y)
                trajectory.steps += 1
        trajectory.append(x1, tuple(y))
        logger.debug("spectral: %d panels (%d split) on [%g, %g]",
                     trajectory.steps, trajectory.rejected, x0, x1)
        return trajectory

    def _panel(self, system, xl, xr, yl, t, smat, vinv):
        half = 0.5 * (xr - xl)
        xs = 0.5 * (xl + xr) + half * t
        target = max(self.tol * (xr - xl) / self.scale_length, 1e-15) * system.error_scale(tuple(yl))
        values = np.repeat(yl[None, :], self.degree, axis=0)
        for _ in range(self.max_iter):
            slopes = system.rhs_nodes(xs, values)
            updated = yl[None, :] + half * (smat @ slopes)
            check_finite(updated[-1], xl)
            change = float(np.max(np.abs(updated - values)))
            values = updated
            if change <= target:
                break
        else:
            return False, values
        # trailing Chebyshev coefficients of the slope measure resolution
        coeffs = vinv @ slopes
        tail = float(np.max(np.abs(coeffs[-3:]))) * abs(half)
        if tail > target and (xr - xl) > 16 * math.ulp(max(abs(xl), abs(xr))):
            return False, values
        return True, values
