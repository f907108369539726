"""
End-to-end studies: closed forms, cross-method agreement and the decay
rates of the asymptotic expansion.

These are slow; run them with ``pytest -m slow``.
"""

import math

import pytest

from sturmasym.core.asymptotic import (
    asym_eigenvalue,
    case_target,
    exact_target,
    expansion_rhs,
    iterate_gap,
    oscillatory_integral,
    theta_iterate,
    theta_iterates,
)
from sturmasym.core.errors import BracketNotFoundError
from sturmasym.core.oracle import exact_zero_potential_eigen, oracle_eigenvalue
from sturmasym.core.potential import PotentialSpec, build_regularizer, check_conditions, minimal_order
from sturmasym.core.prufer import BoundaryConditions, integrate_theta, solve_eigenvalue

pytestmark = pytest.mark.slow

LADDER = (1e2, 1e3, 1e4, 1e5, 1e6)


def _theta_residual(N, lam, spec, reg, bc):
    """theta(b) - theta(a) - omega L - R_N(lambda), with theta from the spectral stepper."""
    solution = integrate_theta(lam, spec, reg, bc, tol=1e-12, method="spectral")
    increment = solution.theta_b - solution.theta_a - math.sqrt(lam) * spec.length
    return increment - expansion_rhs(N, lam, spec, reg, bc)


def test_zero_potential_dirichlet_ladder(free_spec, free_reg, dirichlet):
    for n in range(21):
        estimate = solve_eigenvalue(n, free_spec, free_reg, dirichlet, tol=1e-10)
        assert estimate.lam == pytest.approx(((n + 1) * math.pi / 2) ** 2, rel=1e-9)


def test_zero_potential_neumann_end():
    spec = PotentialSpec(C=0.0, K=1.0, a=-math.pi / 2, b=math.pi / 2)
    reg = build_regularizer(spec)
    bc = BoundaryConditions(alpha=0.0, beta=math.pi / 2)
    for n in range(11):
        expected = (n + 0.5) ** 2
        assert exact_zero_potential_eigen(n, spec.a, spec.b, bc) == pytest.approx(expected, rel=1e-12)
        assert solve_eigenvalue(n, spec, reg, bc, tol=1e-10).lam == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("K", [1.0, 1.4])
def test_shooting_matches_oracle(problem, any_case, K):
    spec, reg = problem(1.0, K)
    for n in range(11):
        try:
            shooting = solve_eigenvalue(n, spec, reg, any_case, tol=1e-10)
        except BracketNotFoundError:
            with pytest.raises(BracketNotFoundError):
                oracle_eigenvalue(n, spec, reg, any_case, tol=1e-10)
            continue
        oracle = oracle_eigenvalue(n, spec, reg, any_case, tol=1e-10)
        assert abs(shooting.lam - oracle.lam) <= 1e-6 * shooting.lam


# the second-order residual oscillates before it settles: 2.38, 0.33, 0.56, 0.25, 0.12
@pytest.mark.parametrize("N, slack", [(1, 1.5), (2, 2.0)])
def test_scaled_residual_decays(log_spec, log_reg, dirichlet, N, slack):
    scaled = [abs(_theta_residual(N, lam, log_spec, log_reg, dirichlet)) * lam ** (N / 2.0)
              for lam in LADDER]
    for earlier, later in zip(scaled, scaled[1:]):
        assert later <= slack * earlier
    assert scaled[-1] <= scaled[0] / 10.0


def test_second_order_improves(log_spec, log_reg, dirichlet):
    for n in (20, 40, 80):
        exact = solve_eigenvalue(n, log_spec, log_reg, dirichlet, tol=1e-12, method="spectral")
        first = asym_eigenvalue(n, 1, log_spec, log_reg, dirichlet)
        second = asym_eigenvalue(n, 2, log_spec, log_reg, dirichlet)
        assert abs(second.sqrt_lam - exact.sqrt_lam) <= abs(first.sqrt_lam - exact.sqrt_lam)


def test_robin_end_correction(free_spec, free_reg):
    bc = BoundaryConditions(alpha=0.0, beta=math.pi / 4)

    def scaled_gap(n):
        lam = exact_zero_potential_eigen(n, free_spec.a, free_spec.b, bc)
        gap = exact_target(n, bc, lam, free_spec, free_reg) - case_target(n, bc, lam)
        return abs(gap) * lam ** 1.5

    bound = 1.5 * scaled_gap(5)
    for n in (10, 20, 40):
        assert scaled_gap(n) <= bound


def test_oscillatory_integral_decreases(log_spec, log_reg, dirichlet):
    values = [abs(oscillatory_integral(log_reg.f, theta_iterate(0, lam, log_spec, log_reg, dirichlet)))
              for lam in LADDER]
    assert values[0] > values[2] > values[4]
    for earlier, later in zip(values, values[1:]):
        assert later <= earlier + 1e-12


@pytest.mark.parametrize("K, depth", [(1.0, 1), (1.2, 1), (1.4, 1), (1.6, 2), (1.8, 5)])
def test_condition_checker(problem, K, depth):
    _, reg = problem(1.0, K)
    assert reg.chain_depth == depth
    report = check_conditions(reg, 1)
    assert report.holds == (minimal_order(reg) == 1)
    assert report.holds == (K < 1.3)


def test_iterate_gaps_scale(log_spec, log_reg, dirichlet):
    ladder = LADDER[1:]
    gaps = {}
    for lam in ladder:
        solution = integrate_theta(lam, log_spec, log_reg, dirichlet, tol=1e-12, method="spectral")
        tables = theta_iterates(2, lam, log_spec, log_reg, dirichlet)
        gaps[lam] = [iterate_gap(table, solution) * lam ** (j / 2.0) for j, table in enumerate(tables)]
    for j in range(3):
        baseline = gaps[ladder[0]][j]
        assert all(gaps[lam][j] <= 3.0 * baseline for lam in ladder)


def test_halving_tolerance_barely_moves_eigenvalues(log_spec, log_reg, dirichlet):
    tol = 1e-8
    for n in (2, 5, 10):
        coarse = solve_eigenvalue(n, log_spec, log_reg, dirichlet, tol=tol).lam
        fine = solve_eigenvalue(n, log_spec, log_reg, dirichlet, tol=tol / 2).lam
        assert abs(coarse - fine) <= 4 * tol * coarse


def test_angle_growth_tracks_sqrt_lambda(log_spec, log_reg, dirichlet):
    for n in (10, 20, 40, 80):
        lam = solve_eigenvalue(n, log_spec, log_reg, dirichlet, tol=1e-10, method="spectral").lam
        solution = integrate_theta(lam, log_spec, log_reg, dirichlet, tol=1e-10, method="spectral")
        drift = math.sqrt(lam) - (solution.theta_b - solution.theta_a) / log_spec.length
        assert abs(drift) <= 0.5
