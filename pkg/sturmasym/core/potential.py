"""
Potential and regularizer for q(x) = C|x|^-K, 1 <= K < 2.

The regularizing function f and the remainder F = f^2 - f' - q are kept in
closed form as sums of power-log terms

    coeff * sign(x)^sign_power * |x|^power * ln^log_power |x|

The chain that builds f is run in exact rational arithmetic, so the
identity q - f^2 + f' + F = 0 holds term by term and the non-integrable
parts cancel exactly.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, Optional, Tuple, Any

import numpy as np
from scipy.special import gamma, gammaincc

from sturmasym.core.errors import DomainError, ValidationError, ConditionsNotMetError

logger = logging.getLogger(__name__)

# Exponent comparisons treat values this close as equal.
_EXPONENT_SLACK = 1e-12


def _exact(value: float) -> Fraction:
    """Read a float as the decimal it was written as (1.4 -> 7/5)."""
    return Fraction(repr(float(value)))


@dataclass(frozen=True)
class PotentialSpec:
    """
    Problem instance -y'' + C|x|^-K y = lambda y on [a, b].

    Attributes:
        C: Coupling constant (0 means the regular zero potential)
        K: Singularity exponent, 1 <= K < 2
        a: Left endpoint
        b: Right endpoint
    """

    C: float
    K: float
    a: float
    b: float

    def __post_init__(self):
        for name in ('C', 'K', 'a', 'b'):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
        if not 1.0 <= self.K < 2.0:
            raise ValidationError(f"K out of range [1,2): {self.K}")
        if not self.a < self.b:
            raise ValidationError(f"need a < b, got a={self.a}, b={self.b}")
        if self.C != 0 and not self.a < 0 < self.b:
            raise ValidationError(
                f"the singular point 0 must be interior when C != 0, got [{self.a}, {self.b}]"
            )

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def is_singular(self) -> bool:
        return self.C != 0

    def q(self, x):
        """Evaluate C|x|^-K (x != 0)."""
        return evaluate_terms(q_terms(self), x)

    def to_dict(self) -> Dict[str, Any]:
        return {'C': self.C, 'K': self.K, 'a': self.a, 'b': self.b}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PotentialSpec':
        return cls(C=float(data['C']), K=float(data['K']), a=float(data['a']), b=float(data['b']))


@dataclass(frozen=True)
class PowerLogTerm:
    """
    One term coeff * sign(x)^sign_power * |x|^power * ln^log_power|x|.

    Attributes:
        coeff: Real coefficient
        sign_power: 0 (even) or 1 (odd in x)
        power: Exponent of |x|
        log_power: Nonnegative power of ln|x|
    """

    coeff: float
    sign_power: int
    power: float
    log_power: int

    def __post_init__(self):
        if self.sign_power not in (0, 1):
            raise ValidationError(f"sign_power must be 0 or 1, got {self.sign_power}")
        if self.log_power < 0:
            raise ValidationError(f"log_power must be >= 0, got {self.log_power}")

    @property
    def integrable(self) -> bool:
        """True if the term is integrable near 0."""
        return self.power > -1

    def evaluate(self, x):
        """Evaluate the term at x != 0 (scalar or array)."""
        return evaluate_terms((self,), x)

    def derivative(self) -> Tuple['PowerLogTerm', ...]:
        """Term-wise derivative (one or two terms)."""
        sign_power = (self.sign_power + 1) % 2
        terms = []
        if self.power != 0:
            terms.append(PowerLogTerm(self.coeff * self.power, sign_power,
                                      self.power - 1, self.log_power))
        if self.log_power > 0:
            terms.append(PowerLogTerm(self.coeff * self.log_power, sign_power,
                                      self.power - 1, self.log_power - 1))
        return tuple(terms)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'coeff': self.coeff,
            'signPower': self.sign_power,
            'power': self.power,
            'logPower': self.log_power,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PowerLogTerm':
        return cls(
            coeff=float(data['coeff']),
            sign_power=int(data['signPower']),
            power=float(data['power']),
            log_power=int(data['logPower']),
        )


def evaluate_terms(terms: Iterable[PowerLogTerm], x):
    """
    Evaluate a sum of power-log terms.

    Args:
        terms: Terms to sum
        x: Scalar or array of nonzero abscissae

    Returns:
        float for scalar input, ndarray otherwise

    Raises:
        DomainError: If any x is zero
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr == 0):
        raise DomainError("power-log terms are not defined at x = 0")
    ax = np.abs(arr)
    lx = np.log(ax)
    sx = np.sign(arr)
    out = np.zeros_like(ax)
    for term in terms:
        value = term.coeff * ax ** term.power
        if term.log_power:
            value = value * lx ** term.log_power
        if term.sign_power:
            value = value * sx
        out = out + value
    if arr.ndim == 0:
        return float(out)
    return out


def derivative_terms(terms: Iterable[PowerLogTerm]) -> Tuple[PowerLogTerm, ...]:
    """Symbolic derivative of a term sum."""
    result = []
    for term in terms:
        result.extend(term.derivative())
    return tuple(result)


def leading_term(terms: Iterable[PowerLogTerm]) -> Optional[Tuple[Fraction, int]]:
    """
    Most singular (power, log_power) pair of a term sum near 0.

    Returns:
        (power, log_power) with power read exactly, or None for an empty sum
    """
    best = None
    for term in terms:
        if term.coeff == 0:
            continue
        key = (_exact(term.power), term.log_power)
        if best is None or key[0] < best[0] or (key[0] == best[0] and key[1] > best[1]):
            best = key
    return best


def _term_mass(power: float, log_power: int, eps: float) -> float:
    """Closed form of int_0^eps s^power |ln s|^log_power ds for eps < 1."""
    e1 = power + 1.0
    big_l = -math.log(eps)
    shape = log_power + 1
    # s = exp(-u) turns the integral into an upper incomplete gamma function.
    return float(gammaincc(shape, e1 * big_l) * gamma(shape)) / e1 ** shape


# Exact series: (sign_power, power, log_power) -> coefficient
_Series = Dict[Tuple[int, Fraction, int], Fraction]


def _series_add(*series: _Series, scales: Optional[List[Fraction]] = None) -> _Series:
    scales = scales or [Fraction(1)] * len(series)
    out: _Series = {}
    for s, scale in zip(series, scales):
        for key, coeff in s.items():
            out[key] = out.get(key, Fraction(0)) + scale * coeff
    return {key: coeff for key, coeff in out.items() if coeff != 0}


def _series_mul(left: _Series, right: _Series) -> _Series:
    out: _Series = {}
    for (s1, p1, r1), c1 in left.items():
        for (s2, p2, r2), c2 in right.items():
            key = ((s1 + s2) % 2, p1 + p2, r1 + r2)
            out[key] = out.get(key, Fraction(0)) + c1 * c2
    return {key: coeff for key, coeff in out.items() if coeff != 0}


def _series_antiderivative(series: _Series) -> _Series:
    """
    Canonical antiderivative, no added constant.

    On x > 0, x^p ln^r x integrates to sum_k (-1)^k r!/(r-k)! x^(p+1) ln^(r-k) x / (p+1)^(k+1)
    for p != -1 and to ln^(r+1) x / (r+1) for p = -1. Even integrands get odd
    antiderivatives and vice versa; for p > -1 the result vanishes at 0.
    """
    out: _Series = {}
    for (sign_power, power, log_power), coeff in series.items():
        new_sign = 1 - sign_power
        if power == -1:
            key = (new_sign, Fraction(0), log_power + 1)
            out[key] = out.get(key, Fraction(0)) + coeff / (log_power + 1)
            continue
        e1 = power + 1
        falling = Fraction(1)
        for k in range(log_power + 1):
            key = (new_sign, e1, log_power - k)
            out[key] = out.get(key, Fraction(0)) + coeff * (-1) ** k * falling / e1 ** (k + 1)
            falling *= log_power - k
    return {key: coeff for key, coeff in out.items() if coeff != 0}


def _series_terms(series: _Series) -> Tuple[PowerLogTerm, ...]:
    ordered = sorted(series.items(), key=lambda item: (item[0][1], -item[0][2], item[0][0]))
    try:
        return tuple(
            PowerLogTerm(float(coeff), sign_power, float(power), log_power)
            for (sign_power, power, log_power), coeff in ordered
        )
    except OverflowError as error:
        raise ValidationError(f"regularizer coefficient exceeds the float range ({error}); reduce C") from error


def _q_series(spec: PotentialSpec) -> _Series:
    if spec.C == 0:
        return {}
    return {(0, -_exact(spec.K), 0): _exact(spec.C)}


def q_terms(spec: PotentialSpec) -> Tuple[PowerLogTerm, ...]:
    """The potential C|x|^-K as a term list."""
    return _series_terms(_q_series(spec))


def chain_depth_for(K: float) -> int:
    """Least m >= 1 with 2m - (m+1)K > -1 (K read exactly)."""
    k = _exact(K)
    if not 1 <= k < 2:
        raise ValidationError(f"K out of range [1,2): {K}")
    m = 1
    while 2 * m - (m + 1) * k <= -1:
        m += 1
    return m


@dataclass(frozen=True)
class Regularizer:
    """
    Closed-form regularizer: f and F with -F := q - f^2 + f'.

    Attributes:
        f_terms: Terms of f
        F_terms: Terms of F
        chain_depth: Number of chain steps M used to build f
    """

    f_terms: Tuple[PowerLogTerm, ...]
    F_terms: Tuple[PowerLogTerm, ...]
    chain_depth: int = 1

    def __post_init__(self):
        if self.chain_depth < 1:
            raise ValidationError(f"chain depth must be >= 1, got {self.chain_depth}")
        for label, terms in (('f', self.f_terms), ('F', self.F_terms)):
            for term in terms:
                if not term.integrable:
                    raise ValidationError(
                        f"{label} term with power {term.power} is not integrable near 0"
                    )

    @property
    def is_zero(self) -> bool:
        return not self.f_terms and not self.F_terms

    @cached_property
    def df_terms(self) -> Tuple[PowerLogTerm, ...]:
        """Symbolic f'."""
        return derivative_terms(self.f_terms)

    @cached_property
    def singular_exponent(self) -> Optional[float]:
        """Smallest power among the f and F terms (None for the zero regularizer)."""
        powers = [t.power for t in self.f_terms + self.F_terms]
        return min(powers) if powers else None

    @cached_property
    def _scalar_table(self):
        return (
            tuple((t.coeff, t.sign_power, t.power, t.log_power) for t in self.f_terms),
            tuple((t.coeff, t.sign_power, t.power, t.log_power) for t in self.F_terms),
        )

    def f(self, x):
        return evaluate_terms(self.f_terms, x)

    def F(self, x):
        return evaluate_terms(self.F_terms, x)

    def df(self, x):
        return evaluate_terms(self.df_terms, x)

    def f_and_F(self, x: float) -> Tuple[float, float]:
        """
        Scalar fast path used inside the ODE steppers.

        Raises:
            DomainError: If x is zero
        """
        if x == 0.0:
            raise DomainError("f and F are not defined at x = 0")
        ax = abs(x)
        lx = math.log(ax)
        sx = 1.0 if x > 0 else -1.0
        values = []
        for table in self._scalar_table:
            total = 0.0
            for coeff, sign_power, power, log_power in table:
                term = coeff * ax ** power
                if log_power:
                    term *= lx ** log_power
                if sign_power:
                    term *= sx
                total += term
            values.append(total)
        return values[0], values[1]

    def weight(self, x):
        """|f| + |F|, the weight of the xi sequence."""
        return np.abs(self.f(x)) + np.abs(self.F(x))

    def mass_bound(self, eps: float) -> float:
        """
        Upper bound of int_{-eps}^{eps} (|f| + |F|) from the term-wise closed form.

        Args:
            eps: Half-width of the neighbourhood of 0, 0 < eps < 1
        """
        if self.is_zero:
            return 0.0
        if not 0 < eps < 1:
            raise DomainError(f"mass bound needs 0 < eps < 1, got {eps}")
        total = 0.0
        for term in self.f_terms + self.F_terms:
            total += abs(term.coeff) * _term_mass(term.power, term.log_power, eps)
        return 2.0 * total

    def inner_radius(self, budget: float, cap: float = 0.5) -> float:
        """
        Largest eps <= cap (to a factor 2^(1/8)) with mass_bound(eps) <= budget.

        Args:
            budget: Allowed L1 mass of |f| + |F| over (-eps, eps)
            cap: Upper limit for eps (must be < 1)
        """
        cap = min(cap, 0.5)
        if self.is_zero or self.mass_bound(cap) <= budget:
            return cap
        lo, hi = -300.0, math.log10(cap)
        if self.mass_bound(10.0 ** lo) > budget:
            return 10.0 ** lo
        while hi - lo > 0.0375:
            mid = 0.5 * (lo + hi)
            if self.mass_bound(10.0 ** mid) <= budget:
                lo = mid
            else:
                hi = mid
        return 10.0 ** lo

    def to_dict(self) -> Dict[str, Any]:
        return {
            'chainDepth': self.chain_depth,
            'f': [t.to_dict() for t in self.f_terms],
            'F': [t.to_dict() for t in self.F_terms],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Regularizer':
        return cls(
            f_terms=tuple(PowerLogTerm.from_dict(t) for t in data['f']),
            F_terms=tuple(PowerLogTerm.from_dict(t) for t in data['F']),
            chain_depth=int(data['chainDepth']),
        )


def build_regularizer(spec: PotentialSpec, depth: Optional[int] = None) -> Regularizer:
    """
    Build f and F for q = C|x|^-K by the antiderivative chain.

    f_1 is the antiderivative of -q; each further step sets
    f_{m+1} = f_1 + int (f_m^2)_sing, where (.)_sing keeps the terms with
    power <= 0 (the bounded remainder goes into F). Then
    F = f_M^2 - (f_{M-1}^2)_sing, exactly f^2 - f' - q.

    Args:
        spec: Problem instance
        depth: Chain depth M; defaults to the least m with 2m - (m+1)K > -1

    Returns:
        Regularizer with integrable f and F

    Raises:
        ValidationError: If K is out of range, C is not finite or depth < 1
    """
    if depth is not None and depth < 1:
        raise ValidationError(f"chain depth must be >= 1, got {depth}")
    if spec.C == 0:
        return Regularizer(f_terms=(), F_terms=(), chain_depth=1)

    depth = depth or chain_depth_for(spec.K)
    minus_q = _series_add(_q_series(spec), scales=[Fraction(-1)])
    f1 = _series_antiderivative(minus_q)

    f = f1
    f_prev_sq: _Series = {}
    for _ in range(1, depth):
        square = _series_mul(f, f)
        f_prev_sq = {key: c for key, c in square.items() if key[1] <= 0}
        f = _series_add(f1, _series_antiderivative(f_prev_sq))

    F = _series_add(_series_mul(f, f), f_prev_sq, scales=[Fraction(1), Fraction(-1)])
    reg = Regularizer(f_terms=_series_terms(f), F_terms=_series_terms(F), chain_depth=depth)
    logger.info("Regularizer for C=%g, K=%g: depth %d, %d f terms, %d F terms",
                spec.C, spec.K, depth, len(reg.f_terms), len(reg.F_terms))
    return reg


def eval_f(reg: Regularizer, x):
    """Pointwise f (x != 0)."""
    return reg.f(x)


def eval_F(reg: Regularizer, x):
    """Pointwise F (x != 0)."""
    return reg.F(x)


@lru_cache(maxsize=4096)
def _xi_first(reg: Regularizer, t: float, tol: float) -> float:
    from sturmasym.core.quadrature import QuadratureSettings, integrate_singular

    lo, hi = (t, 0.0) if t < 0 else (0.0, t)
    result = integrate_singular(reg.weight, lo, hi, QuadratureSettings(tol=tol),
                                singular_exponent=reg.singular_exponent)
    return abs(result.value)


def xi(reg: Regularizer, j: int, t: float, tol: float = 1e-12) -> float:
    """
    The sequence xi_j(t) = |int_0^t (|f| + |F|) xi_{j-1}|, xi_0 = 1.

    Unwinding the recursion gives xi_j = xi_1^j / j!, so only xi_1 needs
    singular quadrature.

    Args:
        reg: Regularizer
        j: Index, j >= 1
        t: Point in [a, b]
        tol: Absolute tolerance for xi_1
    """
    if j < 1:
        raise ValidationError(f"xi index must be >= 1, got {j}")
    if reg.is_zero or t == 0:
        return 0.0
    first = _xi_first(reg, float(t), float(tol))
    return first ** j / math.factorial(j)


@dataclass(frozen=True)
class ConditionWitness:
    """
    Local exponent of one product in the integrability hypotheses.

    Attributes:
        product: Human-readable product name, e.g. "f' xi_2"
        exponent: Leading power of |x| near 0 (inf if the product vanishes)
        log_power: Accompanying power of ln|x|
        requirement: "> -1" (integrable) or "> 0" (tends to zero)
        satisfied: Whether the requirement holds
    """

    product: str
    exponent: float
    log_power: int
    requirement: str
    satisfied: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'product': self.product,
            'exponent': self.exponent,
            'logPower': self.log_power,
            'requirement': self.requirement,
            'satisfied': self.satisfied,
        }


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of check_conditions for one order N."""

    order: int
    holds: bool
    witnesses: Tuple[ConditionWitness, ...] = field(default_factory=tuple)

    @property
    def failing(self) -> Tuple[str, ...]:
        return tuple(w.product for w in self.witnesses if not w.satisfied)

    @property
    def exponents(self) -> Tuple[float, ...]:
        return tuple(w.exponent for w in self.witnesses)


def _witness(product: str, parts, xi_power: Tuple[Fraction, int], bound: int) -> ConditionWitness:
    if any(p is None for p in parts):
        return ConditionWitness(product, math.inf, 0, f"> {bound}", True)
    exponent = sum((p[0] for p in parts), Fraction(0)) + xi_power[0]
    log_power = sum(p[1] for p in parts) + xi_power[1]
    satisfied = float(exponent) > bound + _EXPONENT_SLACK
    return ConditionWitness(product, float(exponent), log_power, f"> {bound}", satisfied)


def check_conditions(reg: Regularizer, N: int) -> ConditionReport:
    """
    Check the integrability hypotheses for order N by exponent arithmetic.

    Near 0, |f| + |F| ~ |x|^rho ln^r|x| so xi_j ~ |x|^(j(rho+1)) ln^(jr)|x|.
    Requires f' xi_{N+1}, f^2 xi_N, f F xi_N integrable (exponent > -1) and
    f xi_{N+1} -> 0 (exponent > 0).

    Args:
        reg: Regularizer
        N: Order, N >= 1
    """
    if N < 1:
        raise ValidationError(f"order N must be >= 1, got {N}")
    f_lead = leading_term(reg.f_terms)
    F_lead = leading_term(reg.F_terms)
    df_lead = leading_term(reg.df_terms)
    w_lead = leading_term(reg.f_terms + reg.F_terms)

    if w_lead is None:
        witnesses = tuple(
            ConditionWitness(name, math.inf, 0, req, True)
            for name, req in ((f"f' xi_{N + 1}", "> -1"), (f"f^2 xi_{N}", "> -1"),
                              (f"f F xi_{N}", "> -1"), (f"f xi_{N + 1} -> 0", "> 0"))
        )
        return ConditionReport(order=N, holds=True, witnesses=witnesses)

    def xi_power(j: int) -> Tuple[Fraction, int]:
        return (j * (w_lead[0] + 1), j * w_lead[1])

    witnesses = (
        _witness(f"f' xi_{N + 1}", (df_lead,), xi_power(N + 1), -1),
        _witness(f"f^2 xi_{N}", (f_lead, f_lead), xi_power(N), -1),
        _witness(f"f F xi_{N}", (f_lead, F_lead), xi_power(N), -1),
        _witness(f"f xi_{N + 1} -> 0", (f_lead,), xi_power(N + 1), 0),
    )
    holds = all(w.satisfied for w in witnesses)
    logger.debug("conditions N=%d: %s", N, [(w.product, w.exponent) for w in witnesses])
    return ConditionReport(order=N, holds=holds, witnesses=witnesses)


def require_conditions(reg: Regularizer, N: int) -> ConditionReport:
    """check_conditions, raising ConditionsNotMetError when they fail."""
    report = check_conditions(reg, N)
    if not report.holds:
        raise ConditionsNotMetError(
            f"integrability hypotheses fail for N={N}: {', '.join(report.failing)}"
        )
    return report


def minimal_order(reg: Regularizer, n_max: int = 20) -> Optional[int]:
    """Least N <= n_max for which the hypotheses hold, or None."""
    for N in range(1, n_max + 1):
        if check_conditions(reg, N).holds:
            return N
    return None


__all__ = [
    'PotentialSpec',
    'PowerLogTerm',
    'Regularizer',
    'ConditionWitness',
    'ConditionReport',
    'build_regularizer',
    'chain_depth_for',
    'check_conditions',
    'require_conditions',
    'minimal_order',
    'derivative_terms',
    'evaluate_terms',
    'eval_f',
    'eval_F',
    'leading_term',
    'q_terms',
    'xi',
]
