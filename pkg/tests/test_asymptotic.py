"""
Tests for the Picard iterates and the asymptotic eigenvalue expansion.
"""

import math

import numpy as np
import pytest
from scipy.special import sici

from sturmasym.core.asymptotic import (
    asym_eigenvalue,
    case_target,
    exact_target,
    expansion_rhs,
    iterate_gap,
    iterate_tolerance,
    oscillatory_integral,
    theta_iterate,
    theta_iterates,
)
from sturmasym.core.errors import ConditionsNotMetError, ValidationError
from sturmasym.core.oracle import exact_zero_potential_eigen
from sturmasym.core.prufer import BoundaryConditions, integrate_theta, solve_eigenvalue


def _cin(k: float) -> float:
    return np.euler_gamma + math.log(k) - sici(k)[1]


class TestIterates:

    def test_zeroth_iterate_is_linear(self, log_spec, log_reg, dirichlet):
        table = theta_iterate(0, 64.0, log_spec, log_reg, dirichlet)
        np.testing.assert_allclose(table.values, 8.0 * (table.nodes + 1.0), atol=1e-13)
        assert table.theta_a == 0.0
        assert table.theta_b == pytest.approx(16.0)

    def test_free_iterates_coincide(self, free_spec, free_reg, dirichlet):
        tables = theta_iterates(3, 25.0, free_spec, free_reg, dirichlet)
        assert [t.order for t in tables] == [0, 1, 2, 3]
        for table in tables[1:]:
            np.testing.assert_array_equal(table.values, tables[0].values)

    def test_negative_index_rejected(self, log_spec, log_reg, dirichlet):
        with pytest.raises(ValidationError):
            theta_iterate(-1, 10.0, log_spec, log_reg, dirichlet)

    def test_iterates_approach_solution(self, log_spec, log_reg, dirichlet):
        lam = 400.0
        solution = integrate_theta(lam, log_spec, log_reg, dirichlet, tol=1e-11)
        gaps = [iterate_gap(table, solution) for table in theta_iterates(3, lam, log_spec, log_reg, dirichlet)]
        assert gaps[1] < gaps[0]
        assert gaps[3] < gaps[1]

    def test_successive_iterates_contract(self, log_spec, log_reg, dirichlet):
        tables = theta_iterates(3, 1e4, log_spec, log_reg, dirichlet)
        steps = [float(np.max(np.abs(later.values - earlier.values)))
                 for earlier, later in zip(tables, tables[1:])]
        assert steps[0] > 0
        assert steps[1] <= steps[0] and steps[2] <= steps[1]

    def test_quadrature_tolerance_follows_iterate_scale(self):
        assert iterate_tolerance(1, 1e6, 1e-13) == 1e-13
        assert iterate_tolerance(2, 1e4, 1e-8) == pytest.approx(1e-9)
        assert iterate_tolerance(3, 1e6, 1e-13) == pytest.approx(1e-15)

    def test_first_order_integral_closed_form(self, log_spec, log_reg, dirichlet):
        # int_{-1}^{1} f sin(2 theta_0) = cos(2w) Cin(2w) / w for f = -sign(x) ln|x|
        for lam in (100.0, 900.0):
            omega = math.sqrt(lam)
            table = theta_iterate(0, lam, log_spec, log_reg, dirichlet)
            value = oscillatory_integral(log_reg.f, table)
            assert value == pytest.approx(math.cos(2 * omega) * _cin(2 * omega) / omega, abs=1e-9)


class TestExpansion:

    def test_free_expansion_vanishes(self, free_spec, free_reg, dirichlet):
        assert expansion_rhs(1, 100.0, free_spec, free_reg, dirichlet) == 0.0

    def test_matches_iterate_increment(self, log_spec, log_reg, dirichlet):
        lam = 144.0
        table = theta_iterate(2, lam, log_spec, log_reg, dirichlet)
        expected = table.theta_b - table.theta_a - 12.0 * 2.0
        assert expansion_rhs(1, lam, log_spec, log_reg, dirichlet) == pytest.approx(expected, abs=1e-11)

    def test_conditions_enforced(self, problem, dirichlet):
        spec, reg = problem(1.0, 1.4)
        with pytest.raises(ConditionsNotMetError):
            expansion_rhs(1, 100.0, spec, reg, dirichlet)

    def test_decays_with_lambda(self, problem, dirichlet):
        spec, reg = problem(1.0, 1.2)
        small = abs(expansion_rhs(1, 100.0, spec, reg, dirichlet))
        large = abs(expansion_rhs(1, 1e4, spec, reg, dirichlet))
        assert large < small


class TestTargets:

    def test_case_formulas(self):
        omega = 10.0
        assert case_target(3, BoundaryConditions(0.0, 0.0), omega ** 2) == pytest.approx(4 * math.pi)
        assert case_target(3, BoundaryConditions(0.0, math.pi / 4), omega ** 2) == pytest.approx(3.5 * math.pi - 0.1)
        assert case_target(3, BoundaryConditions(math.pi / 4, 0.0), omega ** 2) == pytest.approx(3.5 * math.pi + 0.1)
        assert case_target(3, BoundaryConditions(math.pi / 4, math.pi / 4), omega ** 2) == pytest.approx(3 * math.pi)

    def test_case_two_offset_from_case_one(self):
        beta = 1.1
        lam = 2500.0
        offset = case_target(5, BoundaryConditions(0.0, beta), lam) - case_target(5, BoundaryConditions(), lam)
        assert offset == pytest.approx(-math.pi / 2 - 1.0 / (math.tan(beta) * 50.0), abs=1e-14)

    def test_leading_target_approximates_exact(self, free_spec, free_reg, any_case):
        lam = 1e6
        gap = case_target(4, any_case, lam) - exact_target(4, any_case, lam, free_spec, free_reg)
        assert abs(gap) < 1e-8

    def test_arguments_validated(self, dirichlet):
        with pytest.raises(ValidationError):
            case_target(-1, dirichlet, 10.0)
        with pytest.raises(ValidationError):
            case_target(0, dirichlet, 0.0)


class TestAsymEigenvalue:

    @pytest.mark.parametrize("n", [0, 7])
    def test_free_dirichlet_is_exact(self, free_spec, free_reg, dirichlet, n):
        estimate = asym_eigenvalue(n, 1, free_spec, free_reg, dirichlet)
        assert estimate.lam == pytest.approx(((n + 1) * math.pi / 2) ** 2, rel=1e-12)
        assert estimate.method == "asymptotic-1" and estimate.order == 1

    def test_free_exact_target_reproduces_robin(self, free_spec, free_reg):
        bc = BoundaryConditions(alpha=0.0, beta=0.7)
        estimate = asym_eigenvalue(6, 1, free_spec, free_reg, bc, target="exact")
        assert estimate.lam == pytest.approx(exact_zero_potential_eigen(6, -1.0, 1.0, bc), rel=1e-11)

    def test_unknown_target_rejected(self, free_spec, free_reg, dirichlet):
        with pytest.raises(ValidationError):
            asym_eigenvalue(0, 1, free_spec, free_reg, dirichlet, target="asymptotic")

    def test_conditions_enforced(self, problem, dirichlet):
        spec, reg = problem(1.0, 1.4)
        with pytest.raises(ConditionsNotMetError):
            asym_eigenvalue(10, 1, spec, reg, dirichlet)

    def test_close_to_shooting_for_large_index(self, log_spec, log_reg, dirichlet):
        n = 20
        shooting = solve_eigenvalue(n, log_spec, log_reg, dirichlet, tol=1e-11)
        asym = asym_eigenvalue(n, 1, log_spec, log_reg, dirichlet)
        # error in sqrt(lambda) is far below the spacing of consecutive eigenvalues
        assert abs(math.sqrt(asym.lam) - math.sqrt(shooting.lam)) < 0.05
