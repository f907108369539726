"""
Asymptotic eigenvalue expansion.

Picard iterates of the Prufer equation,

    theta_0(x)     = theta(a) + omega (x - a)
    theta_{j+1}(x) = theta_0(x) + int_a^x [-f sin(2 theta_j) + F sin^2(theta_j) / omega],

converge to theta(x) with an error governed by the xi sequence. Replacing
theta by theta_{N+1} at b turns the eigenvalue condition into

    omega L + R_N(omega) = target(n, omega),

which is solved for omega by fixed-point iteration.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
from scipy.optimize import brentq

from sturmasym.core.errors import BracketNotFoundError, ConvergenceError, ValidationError
from sturmasym.core.estimate import EigenEstimate
from sturmasym.core.oracle import exact_zero_potential_eigen
from sturmasym.core.potential import PotentialSpec, Regularizer, require_conditions
from sturmasym.core.prufer import (
    BoundaryConditions,
    PruferSolution,
    boundary_f,
    theta_a,
    theta_target_b,
)
from sturmasym.core.quadrature import PanelGrid, QuadratureSettings, build_panel_grid

logger = logging.getLogger(__name__)

TARGETS = ('leading', 'exact')


@dataclass(frozen=True, eq=False)
class ApproximantTable:
    """
    theta_j tabulated on a Chebyshev collocation grid.

    Attributes:
        order: j
        lam: Spectral parameter
        grid: Collocation grid over [a, b]
        values: theta_j at grid.nodes
    """

    order: int
    lam: float
    grid: PanelGrid
    values: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def theta_a(self) -> float:
        return float(self.values[0, 0])

    @property
    def theta_b(self) -> float:
        return float(self.values[-1, -1])

    def __call__(self, x):
        """Spectral interpolation of theta_j."""
        return self.grid.interpolate(self.values, x)


def approximant_grid(lam: float, spec: PotentialSpec, reg: Regularizer, tol: float = 1e-13) -> PanelGrid:
    """Collocation grid resolving sin(2 theta_j) for this lambda."""
    omega = math.sqrt(lam)
    settings = QuadratureSettings(tol=tol, oscillation_scale=omega)
    floor = None
    if not reg.is_zero:
        floor = reg.inner_radius(1e-2 * tol * min(1.0, omega), cap=0.25 * min(-spec.a, spec.b))
    return build_panel_grid(spec.a, spec.b, settings, floor=floor,
                            singular_exponent=reg.singular_exponent)


def iterate_tolerance(j: int, lam: float, tol: float) -> float:
    """Quadrature tolerance for theta_j: tol, tightened to a thousandth of lambda^(-(j+1)/2)."""
    return max(min(tol, 1e-3 * lam ** (-(j + 1) / 2.0)), 1e-15)


def _iterate(lam: float, spec: PotentialSpec, reg: Regularizer, bc: BoundaryConditions,
             count: int, tol: float) -> List[ApproximantTable]:
    if not (math.isfinite(lam) and lam > 0):
        raise ValidationError(f"lambda must be positive and finite, got {lam}")
    if count < 0:
        raise ValidationError(f"iterate index must be >= 0, got {count}")
    omega = math.sqrt(lam)
    grid = approximant_grid(lam, spec, reg, iterate_tolerance(count, lam, tol))
    nodes = grid.nodes
    base = theta_a(lam, bc, boundary_f(reg, spec.a)) + omega * (nodes - spec.a)
    tables = [ApproximantTable(0, lam, grid, base)]
    if reg.is_zero:
        return tables + [ApproximantTable(j, lam, grid, base) for j in range(1, count + 1)]
    f_nodes, F_nodes = reg.f(nodes), reg.F(nodes)
    current = base
    for j in range(1, count + 1):
        integrand = -f_nodes * np.sin(2.0 * current) + F_nodes * np.sin(current) ** 2 / omega
        current = base + grid.cumulative(integrand)
        tables.append(ApproximantTable(j, lam, grid, current))
    return tables


def theta_iterates(J: int, lam: float, spec: PotentialSpec, reg: Regularizer,
                   bc: BoundaryConditions, tol: float = 1e-13) -> List[ApproximantTable]:
    """theta_0 .. theta_J on a shared grid."""
    return _iterate(lam, spec, reg, bc, J, tol)


def theta_iterate(j: int, lam: float, spec: PotentialSpec, reg: Regularizer,
                  bc: BoundaryConditions, tol: float = 1e-13) -> ApproximantTable:
    """
    The j-th Picard iterate theta_j as a table.

    Raises:
        ValidationError: If j < 0 or lam <= 0
    """
    return _iterate(lam, spec, reg, bc, j, tol)[-1]


def expansion_rhs(N: int, lam: float, spec: PotentialSpec, reg: Regularizer,
                  bc: BoundaryConditions, tol: float = 1e-13) -> float:
    """
    R_N(lambda) = theta_{N+1}(b) - theta(a) - omega L.

    Zero when C = 0.

    Raises:
        ConditionsNotMetError: If the hypotheses fail for N
    """
    require_conditions(reg, N)
    if reg.is_zero:
        return 0.0
    table = _iterate(lam, spec, reg, bc, N, tol)[-1]
    omega = math.sqrt(lam)
    nodes = table.nodes
    integrand = -reg.f(nodes) * np.sin(2.0 * table.values) + reg.F(nodes) * np.sin(table.values) ** 2 / omega
    return table.grid.integrate(integrand)


def case_target(n: int, bc: BoundaryConditions, lam: float) -> float:
    """
    Leading-order right-hand side of omega L + R_N = target for each case.

    Case 1 (alpha = beta = 0): (n+1) pi
    Case 2 (alpha = 0):        (n + 1/2) pi - cot(beta) / omega
    Case 3 (beta = 0):         (n + 1/2) pi + cot(alpha) / omega
    Case 4:                    n pi + (cot(alpha) - cot(beta)) / omega
    """
    if n < 0:
        raise ValidationError(f"eigenvalue index must be >= 0, got {n}")
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    omega = math.sqrt(lam)

    def cot(angle: float) -> float:
        return math.cos(angle) / math.sin(angle)

    case = bc.case
    if case == 1:
        return (n + 1) * math.pi
    if case == 2:
        return (n + 0.5) * math.pi - cot(bc.beta) / omega
    if case == 3:
        return (n + 0.5) * math.pi + cot(bc.alpha) / omega
    return n * math.pi + (cot(bc.alpha) - cot(bc.beta)) / omega


def exact_target(n: int, bc: BoundaryConditions, lam: float, spec: PotentialSpec,
                 reg: Regularizer) -> float:
    """theta(b) - theta(a) required for index n, with the exact boundary angles."""
    f_a, f_b = boundary_f(reg, spec.a), boundary_f(reg, spec.b)
    return (bc.winding(n) * math.pi + theta_target_b(lam, bc, f_b) - theta_a(lam, bc, f_a))


def asym_eigenvalue(n: int, N: int, spec: PotentialSpec, reg: Regularizer, bc: BoundaryConditions,
                    tol: float = 1e-12, target: str = "leading", max_iter: int = 100,
                    quadrature_tol: float = 1e-13) -> EigenEstimate:
    """
    Eigenvalue from the order-N expansion.

    Iterates omega <- (target(omega) - R_N(omega^2)) / L from the
    zero-potential value; falls back to Brent's method if the iteration
    stalls.

    Args:
        n: Index
        N: Order (hypotheses must hold)
        spec: Problem instance
        reg: Regularizer
        bc: Boundary conditions
        tol: Relative tolerance on omega
        target: "leading" (leading-order case formula) or "exact" (exact boundary angles)
        max_iter: Fixed-point iteration budget

    Raises:
        ConditionsNotMetError: If the hypotheses fail for N
        ConvergenceError: If neither iteration converges
    """
    if target not in TARGETS:
        raise ValidationError(f"target must be one of {TARGETS}, got '{target}'")
    require_conditions(reg, N)
    length = spec.length

    def goal(omega: float) -> float:
        lam = omega * omega
        if target == 'leading':
            return case_target(n, bc, lam)
        return exact_target(n, bc, lam, spec, reg)

    def residual(omega: float) -> float:
        return length * omega + expansion_rhs(N, omega * omega, spec, reg, bc, quadrature_tol) - goal(omega)

    try:
        omega = math.sqrt(exact_zero_potential_eigen(n, spec.a, spec.b, bc))
    except BracketNotFoundError:
        omega = (n + 1) * math.pi / length

    previous_step: Optional[float] = None
    stalls = 0
    converged = False
    for iteration in range(max_iter):
        updated = (goal(omega) - expansion_rhs(N, omega * omega, spec, reg, bc, quadrature_tol)) / length
        if not updated > 0:
            break
        step = abs(updated - omega)
        omega = updated
        if step <= tol * omega:
            converged = True
            break
        if previous_step is not None and step > 0.9 * previous_step:
            stalls += 1
            if stalls >= 2:
                break
        previous_step = step

    if not converged:
        logger.debug("fixed point stalled for n=%d, N=%d; switching to Brent", n, N)
        omega = _brent_fallback(residual, omega, tol)

    lam = omega * omega
    final = residual(omega)
    logger.info("asymptotic n=%d N=%d: lambda=%.15g (residual %.2e)", n, N, lam, final)
    return EigenEstimate(n=n, lam=lam, method=f"asymptotic-{N}", residual=final, order=N,
                         error_bound=2.0 * tol * lam)


def _brent_fallback(residual: Callable[[float], float], omega: float, tol: float) -> float:
    omega = max(omega, 1e-8)
    width = 0.05
    for _ in range(12):
        lo, hi = omega * (1.0 - width), omega * (1.0 + width)
        lo = max(lo, 1e-12)
        r_lo, r_hi = residual(lo), residual(hi)
        if r_lo <= 0 <= r_hi or r_hi <= 0 <= r_lo:
            return brentq(residual, lo, hi, xtol=1e-300, rtol=max(tol, 4 * np.finfo(float).eps))
        width = min(2.0 * width, 0.95)
    raise ConvergenceError(f"no root of the expansion residual near omega = {omega:.6g}",
                           best_value=omega * omega)


def iterate_gap(table: ApproximantTable, solution: PruferSolution) -> float:
    """sup |theta(x) - theta_j(x)| over the solution samples."""
    return float(np.max(np.abs(solution.thetas - table(solution.xs))))


def oscillatory_integral(g: Callable, table: ApproximantTable) -> float:
    """int_a^b g(x) sin(2 theta_j(x)) dx on the table's grid (g vectorized, finite off 0)."""
    nodes = table.nodes
    return table.grid.integrate(np.asarray(g(nodes), dtype=float) * np.sin(2.0 * table.values))


__all__ = [
    'ApproximantTable',
    'EigenEstimate',
    'TARGETS',
    'approximant_grid',
    'asym_eigenvalue',
    'case_target',
    'exact_target',
    'expansion_rhs',
    'iterate_gap',
    'iterate_tolerance',
    'oscillatory_integral',
    'theta_iterate',
    'theta_iterates',
]
