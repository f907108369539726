"""
Graded Picard panels for the neighbourhood of the singular point.

On each panel the first sweep freezes the state to its left value, the
right-hand side is integrated at Gauss-Legendre nodes, and later sweeps
feed the node values back until they settle (Gauss collocation). A panel
is split when the trailing Legendre coefficients of the slope exceed its
share of tol. The coefficients are only integrable at 0, so the panels
shrink geometrically toward it and never touch it; the gap (-floor, floor)
is crossed with the state unchanged.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss, legint, legvander

from sturmasym.core.base_stepper import OdeSystem, Stepper, Trajectory, check_finite
from sturmasym.core.errors import BudgetExceededError, ConvergenceError
from sturmasym.core.quadrature import graded_breakpoints

logger = logging.getLogger(__name__)


def legendre_tools(nodes: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights on [-1, 1], the integration matrix
    S[i, j] = int_{-1}^{t_i} l_j, and the map from node values to Legendre
    coefficients.
    """
    t, w = leggauss(nodes)
    vinv = np.linalg.inv(legvander(t, nodes - 1))
    smat = legvander(t, nodes) @ legint(vinv, lbnd=-1.0)
    return t, w, smat, vinv


class PicardPanelStepper(Stepper):
    """
    Picard iteration on geometrically graded panels.

    Attributes:
        floor: Half-width of the gap at 0 that is skipped
        max_iter: Picard sweeps per panel
        grading_ratio: Ratio of consecutive panel widths toward 0
    """

    name = "picard"
    covers_singularity = True

    def __init__(self, tol: float, scale_length: float = 1.0, max_steps: int = 2_000_000,
                 oscillation_scale: float = 0.0, floor: float = 0.0, nodes: int = 12,
                 max_iter: int = 60, grading_ratio: float = 0.5):
        super().__init__(tol, scale_length, max_steps, oscillation_scale)
        self.floor = floor
        self.max_iter = max_iter
        self.grading_ratio = grading_ratio
        self._t, self._w, self._smat, self._vinv = legendre_tools(nodes)

    def advance(self, system: OdeSystem, x0: float, x1: float,
                y0: Sequence[float]) -> Trajectory:
        pieces, _ = graded_breakpoints(
            x0, x1, ratio=self.grading_ratio, floor=self.floor, width_cap=self.max_step
        )
        panel_count = max(sum(len(p) - 1 for p in pieces), 1)

        trajectory = Trajectory()
        y = np.asarray(y0, dtype=float)
        trajectory.append(x0, tuple(y))
        for piece in pieces:
            # the gap before this piece is crossed with y unchanged
            trajectory.append(float(piece[0]), tuple(y))
            pending: List[Tuple[float, float, float]] = [
                (xl, xr, 1.0 / panel_count) for xl, xr in zip(piece[:-1].tolist(), piece[1:].tolist())
            ]
            pending.reverse()
            while pending:
                if trajectory.steps + trajectory.rejected >= self.max_steps:
                    raise BudgetExceededError(
                        f"picard stepper exhausted {self.max_steps} panels",
                        best_value=float(y[0]),
                    )
                xl, xr, share = pending.pop()
                target = self.tol * share * system.error_scale(tuple(y))
                end, resolved = self._panel(system, xl, xr, y, target)
                if not resolved and (xr - xl) > 16 * math.ulp(max(abs(xl), abs(xr))):
                    mid = 0.5 * (xl + xr)
                    pending.extend([(mid, xr, 0.5 * share), (xl, mid, 0.5 * share)])
                    trajectory.rejected += 1
                    continue
                if end is None:
                    raise ConvergenceError(
                        f"Picard iteration did not settle on panel [{xl:.3e}, {xr:.3e}]",
                        best_value=float(y[0]),
                    )
                y = np.asarray(system.post_step(xr, tuple(end)), dtype=float)
                trajectory.append(xr, tuple(y))
                trajectory.steps += 1
        trajectory.append(x1, tuple(y))
        logger.debug("picard: %d panels (%d split) on [%g, %g], floor %.3e",
                     trajectory.steps, trajectory.rejected, x0, x1, self.floor)
        return trajectory

    def _panel(self, system: OdeSystem, xl: float, xr: float, yl: np.ndarray,
               target: float) -> Tuple[Optional[np.ndarray], bool]:
        half = 0.5 * (xr - xl)
        xn = 0.5 * (xl + xr) + half * self._t
        weights = half * self._w
        predicted = np.repeat(yl[None, :], len(xn), axis=0)
        for _ in range(self.max_iter):
            slopes = system.rhs_nodes(xn, predicted)
            end = yl + weights @ slopes
            check_finite(end, xl)
            updated = yl[None, :] + half * (self._smat @ slopes)
            change = float(np.max(np.abs(updated - predicted)))
            predicted = updated
            settle = max(0.1 * target, 4 * math.ulp(float(np.max(np.abs(end))) + 1.0))
            if change <= settle:
                break
        else:
            return None, False
        # trailing Legendre coefficients of the slope measure resolution
        tail = float(np.max(np.abs(self._vinv[-2:] @ slopes))) * abs(half)
        return end, tail <= max(target, settle)
