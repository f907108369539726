"""Tests for the quasi-derivative oracle."""

import math

import pytest

from sturmasym.core.errors import BracketNotFoundError, ValidationError
from sturmasym.core.oracle import (
    QuasiDerivativeSystem,
    angle_mismatch,
    exact_zero_potential_eigen,
    oracle_eigenvalue,
    shoot_system,
)
from sturmasym.core.prufer import BoundaryConditions, integrate_theta


class TestExactZeroPotential:

    def test_dirichlet_closed_form(self, dirichlet):
        assert exact_zero_potential_eigen(2, -1.0, 1.0, dirichlet) == pytest.approx((1.5 * math.pi) ** 2)

    def test_mixed_satisfies_boundary_equation(self):
        # y = sin(omega (x + 1)) with y(1) = y'(1)
        bc = BoundaryConditions(alpha=0.0, beta=math.pi / 4)
        omega = math.sqrt(exact_zero_potential_eigen(1, -1.0, 1.0, bc))
        assert math.tan(2.0 * omega) == pytest.approx(omega, rel=1e-10)
        assert math.pi / 2 < 2.0 * omega < 3.0 * math.pi / 2

    def test_robin_both_ends(self):
        bc = BoundaryConditions(alpha=math.pi / 4, beta=math.pi / 4)
        assert exact_zero_potential_eigen(1, -1.0, 1.0, bc) == pytest.approx((math.pi / 2) ** 2, rel=1e-12)

    def test_negative_eigenvalue(self):
        bc = BoundaryConditions(alpha=math.pi / 4, beta=math.pi / 4)
        with pytest.raises(BracketNotFoundError):
            exact_zero_potential_eigen(0, -1.0, 1.0, bc)

    def test_arguments_validated(self, dirichlet):
        with pytest.raises(ValidationError):
            exact_zero_potential_eigen(-1, -1.0, 1.0, dirichlet)
        with pytest.raises(ValidationError):
            exact_zero_potential_eigen(0, 1.0, -1.0, dirichlet)


class TestShootSystem:

    def test_zero_count_matches_free_solution(self, free_spec, free_reg, dirichlet):
        # sin(omega (x + 1)) with omega = 7.3 has floor(2 omega / pi) interior zeros
        result = shoot_system(7.3 ** 2, free_spec, free_reg, dirichlet)
        assert result.zero_count == 4
        assert result.state.y0 == pytest.approx(math.sin(14.6) / 7.3, abs=1e-8)

    def test_end_angle_at_eigenvalue(self, free_spec, free_reg, dirichlet):
        lam = (3 * math.pi / 2) ** 2
        result = shoot_system(lam, free_spec, free_reg, dirichlet)
        assert abs(angle_mismatch(2, result, dirichlet)) < 1e-8

    def test_renormalizes_large_states(self, free_spec, free_reg, dirichlet):
        system = QuasiDerivativeSystem(free_reg, 1.0)
        assert system.post_step(0.0, (3e6, 4e6)) == pytest.approx((0.6, 0.8))
        assert system.renormalizations == 1
        assert system.post_step(0.0, (1.0, 2.0)) == (1.0, 2.0)

    def test_non_positive_lambda_rejected(self, log_spec, log_reg, dirichlet):
        with pytest.raises(ValidationError):
            shoot_system(0.0, log_spec, log_reg, dirichlet)

    @pytest.mark.parametrize("K, lam", [(1.0, 30.0), (1.0, 400.0), (1.4, 50.0)])
    def test_end_angle_matches_prufer_angle(self, problem, any_case, K, lam):
        spec, reg = problem(1.0, K)
        result = shoot_system(lam, spec, reg, any_case)
        theta_b = integrate_theta(lam, spec, reg, any_case).theta_b
        direct = math.atan2(math.sqrt(lam) * result.state.y0, result.state.y1)
        gap = (direct - theta_b) % math.pi
        assert min(gap, math.pi - gap) < 1e-7

    def test_zero_count_nondecreasing_in_lambda(self, log_spec, log_reg, dirichlet):
        counts = [shoot_system(4.0 ** k, log_spec, log_reg, dirichlet).zero_count for k in range(7)]
        assert counts == sorted(counts)
        assert counts[-1] > counts[0]


class TestOracleEigenvalue:

    @pytest.mark.parametrize("n", [0, 2, 5])
    def test_zero_potential_dirichlet(self, free_spec, free_reg, dirichlet, n):
        estimate = oracle_eigenvalue(n, free_spec, free_reg, dirichlet)
        assert estimate.lam == pytest.approx(((n + 1) * math.pi / 2) ** 2, rel=1e-9)
        assert estimate.method == "oracle"

    def test_zero_potential_robin(self, free_spec, free_reg):
        bc = BoundaryConditions(alpha=math.pi / 4, beta=0.0)
        estimate = oracle_eigenvalue(1, free_spec, free_reg, bc)
        assert estimate.lam == pytest.approx(exact_zero_potential_eigen(1, -1.0, 1.0, bc), rel=1e-9)

    def test_eigenfunction_has_n_interior_zeros(self, log_spec, log_reg, dirichlet):
        estimate = oracle_eigenvalue(3, log_spec, log_reg, dirichlet)
        # slightly above the eigenvalue, y(b) has not yet returned to zero
        result = shoot_system(estimate.lam * (1 + 1e-6), log_spec, log_reg, dirichlet)
        assert result.zero_count in (3, 4)
