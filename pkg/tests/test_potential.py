"""
Tests for the potential and the closed-form regularizer.

Covers:
- problem validation
- the antiderivative chain (depths, explicit terms, the defining identity)
- singular mass bounds and the xi sequence
- the integrability checker
"""

import math

import numpy as np
import pytest

from sturmasym.core.errors import ConditionsNotMetError, DomainError, ValidationError
from sturmasym.core.potential import (
    PotentialSpec,
    PowerLogTerm,
    Regularizer,
    build_regularizer,
    chain_depth_for,
    check_conditions,
    eval_F,
    eval_f,
    minimal_order,
    q_terms,
    require_conditions,
    evaluate_terms,
    xi,
)


# ============================================================================
# PROBLEM VALIDATION
# ============================================================================

class TestPotentialSpec:

    def test_rejects_k_out_of_range(self):
        with pytest.raises(ValidationError, match=r"K out of range \[1,2\)"):
            PotentialSpec(C=1.0, K=2.5, a=-1.0, b=1.0)

    def test_rejects_k_below_one(self):
        with pytest.raises(ValidationError):
            PotentialSpec(C=1.0, K=0.5, a=-1.0, b=1.0)

    def test_singular_point_must_be_interior(self):
        with pytest.raises(ValidationError):
            PotentialSpec(C=1.0, K=1.0, a=0.0, b=1.0)

    def test_zero_potential_may_touch_origin(self):
        spec = PotentialSpec(C=0.0, K=1.0, a=0.0, b=1.0)
        assert spec.length == 1.0

    def test_rejects_reversed_interval(self):
        with pytest.raises(ValidationError):
            PotentialSpec(C=0.0, K=1.0, a=1.0, b=-1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            PotentialSpec(C=math.nan, K=1.0, a=-1.0, b=1.0)

    def test_q_is_symmetric(self):
        spec = PotentialSpec(C=2.0, K=1.5, a=-1.0, b=1.0)
        assert spec.q(0.25) == pytest.approx(2.0 * 0.25 ** -1.5)
        assert spec.q(-0.25) == pytest.approx(spec.q(0.25))

    def test_round_trip_dict(self):
        spec = PotentialSpec(C=1.0, K=1.2, a=-0.5, b=2.0)
        assert PotentialSpec.from_dict(spec.to_dict()) == spec


# ============================================================================
# CHAIN CONSTRUCTION
# ============================================================================

class TestChain:

    @pytest.mark.parametrize("K, depth", [(1.0, 1), (1.2, 1), (1.4, 1), (1.6, 2), (1.8, 5)])
    def test_depth_rule(self, K, depth):
        assert chain_depth_for(K) == depth
        spec = PotentialSpec(C=1.0, K=K, a=-1.0, b=1.0)
        assert build_regularizer(spec).chain_depth == depth

    def test_log_case_terms(self, log_reg):
        assert log_reg.f_terms == (PowerLogTerm(-1.0, 1, 0.0, 1),)
        assert log_reg.F_terms == (PowerLogTerm(1.0, 0, 0.0, 2),)

    def test_log_case_values(self, log_reg):
        assert eval_f(log_reg, 0.5) == pytest.approx(math.log(2.0))
        assert eval_f(log_reg, -0.5) == pytest.approx(-math.log(2.0))
        assert eval_F(log_reg, 0.5) == pytest.approx(math.log(2.0) ** 2)

    def test_power_case_first_step(self, problem):
        _, reg = problem(1.0, 1.2)
        # f_1 = C sign(x) |x|^(1-K) / (K-1)
        assert eval_f(reg, 0.3) == pytest.approx(5.0 * 0.3 ** -0.2, rel=1e-14)
        assert eval_f(reg, -0.3) == pytest.approx(-5.0 * 0.3 ** -0.2, rel=1e-14)

    def test_depth_two_leading_exponent(self, problem):
        _, reg = problem(1.0, 1.6)
        assert reg.chain_depth == 2
        assert min(t.power for t in reg.F_terms) == pytest.approx(-0.8)

    def test_zero_potential_has_empty_regularizer(self, free_reg):
        assert free_reg.is_zero
        assert free_reg.f_terms == () and free_reg.F_terms == ()

    @pytest.mark.parametrize("K", [1.0, 1.2, 1.4, 1.5, 1.6, 1.8])
    @pytest.mark.parametrize("C", [1.0, -0.5])
    def test_defining_identity(self, problem, C, K):
        spec, reg = problem(C, K)
        x = np.array([-0.9, -0.3, -1e-3, 1e-4, 0.02, 0.77])
        q = evaluate_terms(q_terms(spec), x)
        f, F, df = reg.f(x), reg.F(x), reg.df(x)
        scale = np.abs(q) + f ** 2 + np.abs(df) + np.abs(F)
        np.testing.assert_array_less(np.abs(q - f ** 2 + df + F), 1e-11 * scale)

    @pytest.mark.parametrize("K", [1.0, 1.3, 1.6, 1.8, 1.9])
    def test_all_terms_integrable(self, problem, K):
        _, reg = problem(1.0, K)
        assert all(t.power > -1 for t in reg.f_terms + reg.F_terms)

    def test_overflowing_coefficients_rejected(self):
        with pytest.raises(ValidationError):
            build_regularizer(PotentialSpec(C=1e200, K=1.0, a=-1.0, b=1.0))

    def test_explicit_depth_override(self, problem):
        _, reg = problem(1.0, 1.4, depth=2)
        assert reg.chain_depth == 2
        with pytest.raises(ValidationError):
            build_regularizer(PotentialSpec(C=1.0, K=1.4, a=-1.0, b=1.0), depth=0)

    def test_evaluation_at_origin_is_an_error(self, log_reg):
        with pytest.raises(DomainError):
            eval_f(log_reg, 0.0)
        with pytest.raises(DomainError):
            log_reg.f_and_F(0.0)

    def test_scalar_path_matches_vector_path(self, problem):
        _, reg = problem(0.7, 1.6)
        for x in (-0.6, -0.01, 0.2):
            f, F = reg.f_and_F(x)
            assert f == pytest.approx(reg.f(x), rel=1e-14)
            assert F == pytest.approx(reg.F(x), rel=1e-14)

    def test_round_trip_dict(self, problem):
        _, reg = problem(1.0, 1.6)
        assert Regularizer.from_dict(reg.to_dict()) == reg

    def test_non_integrable_terms_rejected(self):
        with pytest.raises(ValidationError):
            Regularizer(f_terms=(PowerLogTerm(1.0, 0, -1.0, 0),), F_terms=())


# ============================================================================
# MASS BOUNDS AND XI
# ============================================================================

def _log_mass(eps: float) -> float:
    # int_0^eps (|ln s| + ln^2 s) ds
    ln = math.log(eps)
    return eps * (1.0 - ln) + eps * (ln * ln - 2.0 * ln + 2.0)


class TestMass:

    @pytest.mark.parametrize("eps", [0.5, 1e-3, 1e-12])
    def test_log_case_mass_is_exact(self, log_reg, eps):
        assert log_reg.mass_bound(eps) == pytest.approx(2.0 * _log_mass(eps), rel=1e-12)

    def test_inner_radius_meets_budget(self, problem):
        _, reg = problem(1.0, 1.8)
        budget = 1e-10
        radius = reg.inner_radius(budget)
        assert reg.mass_bound(radius) <= budget
        assert reg.mass_bound(1.2 * radius) > budget

    def test_zero_regularizer(self, free_reg):
        assert free_reg.mass_bound(0.1) == 0.0
        assert free_reg.inner_radius(1e-12, cap=0.3) == 0.3

    def test_xi_first_closed_form(self, log_reg):
        assert xi(log_reg, 1, 0.5) == pytest.approx(_log_mass(0.5), rel=1e-10)
        assert xi(log_reg, 1, -0.5) == pytest.approx(_log_mass(0.5), rel=1e-10)

    def test_xi_factorial_structure(self, log_reg):
        first = xi(log_reg, 1, 0.8)
        assert xi(log_reg, 3, 0.8) == pytest.approx(first ** 3 / 6.0, rel=1e-14)

    def test_xi_total_mass(self, log_reg):
        assert xi(log_reg, 1, 1.0) == pytest.approx(3.0, rel=1e-10)

    @pytest.mark.parametrize("side", [-1.0, 1.0])
    def test_xi_nondecreasing_in_distance(self, log_reg, side):
        for j in (1, 2, 3):
            values = [xi(log_reg, j, side * t) for t in (0.05, 0.2, 0.5, 0.9, 1.0)]
            assert values == sorted(values)

    def test_xi_bounded_by_total_mass(self, log_reg):
        c = xi(log_reg, 1, -1.0) + xi(log_reg, 1, 1.0)
        assert c == pytest.approx(6.0, rel=1e-10)
        for t in (-0.7, -0.1, 0.3, 1.0):
            for j in (2, 3, 4):
                assert xi(log_reg, j, t) <= c * xi(log_reg, j - 1, t)

    def test_xi_vanishes_at_origin(self, log_reg):
        assert xi(log_reg, 2, 0.0) == 0.0

    def test_xi_index_validated(self, log_reg):
        with pytest.raises(ValidationError):
            xi(log_reg, 0, 0.5)


# ============================================================================
# INTEGRABILITY CHECKER
# ============================================================================

class TestConditions:

    @pytest.mark.parametrize("K", [1.0, 1.2])
    def test_hold_at_first_order(self, problem, K):
        _, reg = problem(1.0, K)
        report = check_conditions(reg, 1)
        assert report.holds
        assert report.failing == ()

    def test_k_one_point_four_fails_on_boundary_exponent(self, problem):
        _, reg = problem(1.0, 1.4)
        report = check_conditions(reg, 1)
        assert not report.holds
        witness = report.witnesses[0]
        assert witness.product == "f' xi_2"
        assert witness.exponent == pytest.approx(-1.0)
        assert not witness.satisfied

    def test_deeper_chain_restores_first_order(self, problem):
        _, reg = problem(1.0, 1.4, depth=2)
        assert check_conditions(reg, 1).holds

    @pytest.mark.parametrize("K, order", [(1.0, 1), (1.2, 1), (1.4, 2), (1.6, 3)])
    def test_minimal_order(self, problem, K, order):
        _, reg = problem(1.0, K)
        assert minimal_order(reg) == order

    def test_require_raises(self, problem):
        _, reg = problem(1.0, 1.4)
        with pytest.raises(ConditionsNotMetError):
            require_conditions(reg, 1)

    def test_zero_regularizer_holds(self, free_reg):
        report = check_conditions(free_reg, 1)
        assert report.holds
        assert all(math.isinf(e) for e in report.exponents)

    def test_order_validated(self, log_reg):
        with pytest.raises(ValidationError):
            check_conditions(log_reg, 0)
