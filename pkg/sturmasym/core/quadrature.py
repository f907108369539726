"""
Quadrature for integrands with an integrable singularity at x = 0.

Two tools live here:

- integrate_singular: vectorized adaptive Gauss-Kronrod (G7/K15) on panels
  graded geometrically toward 0, with an optional width cap for oscillatory
  integrands and an analytic estimate of the innermost tail.
- PanelGrid: Chebyshev-Lobatto collocation panels on the same grading, with
  a spectral integration matrix for cumulative integrals and interpolation.
"""

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial import chebyshev as cheb

from sturmasym.core.errors import (
    DomainError,
    NonFiniteCoefficientError,
    QuadratureBudgetError,
    ValidationError,
)

logger = logging.getLogger(__name__)

# Kronrod abscissae on [0, 1] (descending), with K15 and G7 weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG7 = {
    1: 0.129484966168869693270611432679082,
    3: 0.279705391489276667901467771423780,
    5: 0.381830050505118944950369775488975,
    7: 0.417959183673469387755102040816327,
}

# Full 15-point rule on [-1, 1].
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
for _i, _w in _WG7.items():
    _GAUSS[_i] = _w
    _GAUSS[14 - _i] = _w

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


@dataclass(frozen=True)
class QuadratureSettings:
    """
    Settings for singular quadrature and collocation grids.

    Attributes:
        tol: Absolute tolerance
        max_panels: Panel budget before QuadratureBudgetError
        grading_ratio: Geometric ratio of consecutive panels toward 0
        oscillation_scale: Frequency omega of the integrand (0 = not oscillatory)
        nodes_per_period: Panels per period 2*pi/omega (>= 4)
        panel_fraction: Widest panel as a fraction of the interval length
    """

    tol: float = 1e-10
    max_panels: int = 1_000_000
    grading_ratio: float = 0.5
    oscillation_scale: float = 0.0
    nodes_per_period: int = 4
    panel_fraction: float = 0.125

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError(f"tolerance must be positive, got {self.tol}")
        if self.max_panels < 8:
            raise ValidationError(f"max_panels must be >= 8, got {self.max_panels}")
        if not 0 < self.grading_ratio < 1:
            raise ValidationError(f"grading ratio must be in (0, 1), got {self.grading_ratio}")
        if self.oscillation_scale < 0:
            raise ValidationError("oscillation scale must be >= 0")
        if self.nodes_per_period < 4:
            raise ValidationError("need at least 4 panels per period")
        if not 0 < self.panel_fraction <= 1:
            raise ValidationError("panel_fraction must be in (0, 1]")

    def with_(self, **changes) -> 'QuadratureSettings':
        return replace(self, **changes)

    def width_cap(self, span: float) -> float:
        cap = self.panel_fraction * span
        if self.oscillation_scale > 0:
            cap = min(cap, 2.0 * math.pi / (self.oscillation_scale * self.nodes_per_period))
        return cap


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value with its absolute error estimate."""

    value: float
    error_estimate: float
    panels: int = 0


def singular_floor(span: float, tol: float, singular_exponent: Optional[float] = None) -> float:
    """
    Distance from 0 below which the integrand is not sampled.

    With a known local exponent p (integrand ~ |x|^p) the floor is chosen
    so the neglected tail is far below tol.
    """
    rel = 1e-14
    if singular_exponent is not None:
        e1 = singular_exponent + 1.0
        if e1 <= 0:
            raise DomainError(f"integrand |x|^{singular_exponent} is not integrable at 0")
        rel = min(rel, (tol * 1e-3) ** (1.0 / e1))
    return span * max(rel, 1e-300)


def _graded_side(lo: float, hi: float, ratio: float, floor: float, cap: float) -> np.ndarray:
    """Ascending breakpoints of [max(lo, floor), hi] in distance from 0."""
    start = max(lo, floor)
    points = [hi]
    s = hi
    while s * ratio > start:
        s *= ratio
        points.append(s)
    points.append(start)
    points = np.array(points[::-1])
    return _cap_widths(points, cap)


def _cap_widths(points: np.ndarray, cap: float) -> np.ndarray:
    if not math.isfinite(cap):
        return points
    widths = np.diff(points)
    counts = np.maximum(1, np.ceil(widths / cap - 1e-9)).astype(int)
    if np.all(counts == 1):
        return points
    pieces = [np.linspace(points[i], points[i + 1], counts[i] + 1)[:-1] for i in range(len(widths))]
    pieces.append(points[-1:])
    return np.concatenate(pieces)


def graded_breakpoints(x0: float, x1: float, *, ratio: float = 0.5,
                       floor: float = 0.0, width_cap: float = math.inf
                       ) -> Tuple[List[np.ndarray], List[Tuple[float, float]]]:
    """
    Panel breakpoints for [x0, x1], graded toward 0 when 0 is in reach.

    Args:
        x0: Left end
        x1: Right end
        ratio: Geometric ratio of consecutive panels toward 0
        floor: Distance from 0 that is never crossed by a panel
        width_cap: Maximum panel width

    Returns:
        (pieces, gaps): ascending breakpoint arrays for each connected
        piece, and the (left, right) intervals next to 0 left uncovered
    """
    if not x0 < x1:
        raise ValidationError(f"need x0 < x1, got {x0}, {x1}")
    floor = max(floor, 1e-300 * (x1 - x0), 1e-300)
    pieces: List[np.ndarray] = []
    gaps: List[Tuple[float, float]] = []
    if x0 >= 0:
        if x0 < floor:
            gaps.append((x0, min(floor, x1)))
        if x1 > floor:
            pieces.append(_graded_side(x0, x1, ratio, floor, width_cap))
    elif x1 <= 0:
        if -x1 < floor:
            gaps.append((max(-floor, x0), x1))
        if -x0 > floor:
            pieces.append(-_graded_side(-x1, -x0, ratio, floor, width_cap)[::-1])
    else:
        if -x0 > floor:
            pieces.append(-_graded_side(0.0, -x0, ratio, floor, width_cap)[::-1])
        gaps.append((max(-floor, x0), min(floor, x1)))
        if x1 > floor:
            pieces.append(_graded_side(0.0, x1, ratio, floor, width_cap))
    return pieces, gaps


def _gauss_kronrod(g: Callable, lefts: np.ndarray, rights: np.ndarray):
    """G7/K15 on each panel; returns (values, error estimates, abs integrals)."""
    centres = 0.5 * (lefts + rights)
    half = 0.5 * (rights - lefts)
    x = centres[:, None] + half[:, None] * _NODES[None, :]
    fx = np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)
    if not np.all(np.isfinite(fx)):
        raise NonFiniteCoefficientError("integrand produced a non-finite value")
    kronrod = fx @ _KRONROD
    gauss = fx @ _GAUSS
    mean = 0.5 * kronrod
    resabs = np.abs(fx) @ _KRONROD * np.abs(half)
    resasc = np.abs(fx - mean[:, None]) @ _KRONROD * np.abs(half)
    err = np.abs((kronrod - gauss) * half)
    scaled = np.where(
        (resasc != 0) & (err != 0),
        resasc * np.minimum(1.0, (200.0 * err / np.where(resasc != 0, resasc, 1.0)) ** 1.5),
        err,
    )
    scaled = np.where(resabs > _UFLOW / (50 * _EPMACH), np.maximum(50 * _EPMACH * resabs, scaled), scaled)
    return kronrod * half, scaled, resabs


def _tail(g: Callable, gap: Tuple[float, float], singular_exponent: Optional[float]) -> Tuple[float, float]:
    """Estimate of the integral over a gap next to 0, with its uncertainty."""
    left, right = gap
    outer = right if abs(right) >= abs(left) else left
    inner = left if outer is right else right
    if outer == 0:
        return 0.0, 0.0
    g_outer = float(np.asarray(g(np.array([outer])), dtype=float).reshape(-1)[0])
    if not math.isfinite(g_outer):
        raise NonFiniteCoefficientError("integrand produced a non-finite value")
    width = abs(outer)
    if singular_exponent is None:
        return 0.0, abs(g_outer) * abs(right - left)
    e1 = singular_exponent + 1.0
    shrink = 1.0 - (abs(inner) / width) ** e1 if inner != 0 else 1.0
    # sign follows the orientation of the gap
    value = g_outer * width / e1 * shrink
    return value, 0.1 * abs(value)


def integrate_singular(g: Callable, x0: float, x1: float,
                       settings: Optional[QuadratureSettings] = None, *,
                       singular_exponent: Optional[float] = None) -> QuadratureResult:
    """
    Adaptive integral of g over [x0, x1] with an integrable singularity at 0.

    The integrand is never evaluated at 0. Panels are graded toward 0 and
    bisected greedily (largest errors first, in batches) until the summed
    error estimate is below tol.

    Args:
        g: Vectorized integrand (accepts and returns arrays)
        x0: Left end
        x1: Right end
        settings: Tolerance, panel budget and oscillation data
        singular_exponent: Local power p of g near 0 if known

    Returns:
        QuadratureResult with |value - exact| <= max(tol, error_estimate)

    Raises:
        ValidationError: If x0 > x1
        QuadratureBudgetError: If the panel budget runs out first
        NonFiniteCoefficientError: If g returns NaN or inf
    """
    settings = settings or QuadratureSettings()
    if x0 > x1:
        raise ValidationError(f"need x0 <= x1, got {x0}, {x1}")
    if x0 == x1:
        return QuadratureResult(0.0, 0.0, 0)

    span = x1 - x0
    floor = singular_floor(span, settings.tol, singular_exponent)
    pieces, gaps = graded_breakpoints(
        x0, x1, ratio=settings.grading_ratio, floor=floor, width_cap=settings.width_cap(span)
    )

    halves = []
    for left, right in gaps:
        if left < 0 < right:
            halves.extend([(left, 0.0), (0.0, right)])
        else:
            halves.append((left, right))
    tails = [_tail(g, gap, singular_exponent) for gap in halves]
    tail_value = math.fsum(t[0] for t in tails)
    tail_error = sum(t[1] for t in tails)

    if pieces:
        lefts = np.concatenate([p[:-1] for p in pieces])
        rights = np.concatenate([p[1:] for p in pieces])
    else:
        lefts = rights = np.empty(0)

    if lefts.size:
        values, errors, resabs = _gauss_kronrod(g, lefts, rights)
    else:
        values = errors = resabs = np.empty(0)
    target = 0.5 * settings.tol

    while lefts.size:
        total_error = float(errors.sum())
        if total_error <= target:
            break
        # panels at the roundoff floor or at float resolution cannot improve
        improvable = ((errors > 50 * _EPMACH * resabs * (1.0 + 1e-9))
                      & ((rights - lefts) > 8 * _EPMACH * np.maximum(np.abs(lefts), np.abs(rights))))
        order = np.argsort(-errors)
        cumulative = np.cumsum(errors[order])
        count = int(np.searchsorted(cumulative, total_error - 0.5 * target)) + 1
        chosen = np.zeros(lefts.size, dtype=bool)
        chosen[order[:count]] = True
        chosen &= improvable
        if not chosen.any():
            logger.debug("quadrature stalled at error %.3e with %d panels", total_error, lefts.size)
            break
        if lefts.size + int(chosen.sum()) > settings.max_panels:
            raise QuadratureBudgetError(
                f"panel budget {settings.max_panels} exhausted at error {total_error:.3e}",
                best_value=math.fsum(values.tolist()) + tail_value,
                error_estimate=total_error + tail_error,
            )
        mids = 0.5 * (lefts[chosen] + rights[chosen])
        new_lefts = np.concatenate([lefts[chosen], mids])
        new_rights = np.concatenate([mids, rights[chosen]])
        new_values, new_errors, new_resabs = _gauss_kronrod(g, new_lefts, new_rights)
        keep = ~chosen
        lefts = np.concatenate([lefts[keep], new_lefts])
        rights = np.concatenate([rights[keep], new_rights])
        values = np.concatenate([values[keep], new_values])
        errors = np.concatenate([errors[keep], new_errors])
        resabs = np.concatenate([resabs[keep], new_resabs])

    value = math.fsum(values.tolist()) + tail_value
    error = float(errors.sum()) + tail_error
    return QuadratureResult(value=value, error_estimate=error, panels=int(lefts.size))


@lru_cache(maxsize=8)
def chebyshev_tools(degree: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Chebyshev-Lobatto nodes on [-1, 1] with integration and coefficient maps.

    Returns:
        (t, S, Vinv): ascending nodes, the matrix with (S v)_k = int_{-1}^{t_k} p
        for the interpolant p of v, and the values-to-coefficients map
    """
    if degree < 2:
        raise ValidationError("Chebyshev panels need at least 2 nodes")
    t = -np.cos(np.pi * np.arange(degree) / (degree - 1))
    vander = cheb.chebvander(t, degree - 1)
    vinv = np.linalg.inv(vander)
    antider = np.empty((degree, degree))
    for i in range(degree):
        unit = np.zeros(degree)
        unit[i] = 1.0
        antider[:, i] = cheb.chebval(t, cheb.chebint(unit, lbnd=-1))
    return t, antider @ vinv, vinv


@dataclass(frozen=True, eq=False)
class PanelGrid:
    """
    Chebyshev-Lobatto collocation panels over [x0, x1].

    Attributes:
        lefts: Left panel ends, ascending
        rights: Right panel ends
        degree: Nodes per panel
        gaps: Uncovered intervals next to 0 (at most one)
        singular_exponent: Local power used for the gap tail estimate
    """

    lefts: np.ndarray
    rights: np.ndarray
    degree: int = 20
    gaps: Tuple[Tuple[float, float], ...] = ()
    singular_exponent: Optional[float] = None

    @property
    def panel_count(self) -> int:
        return int(self.lefts.size)

    @property
    def nodes(self) -> np.ndarray:
        """Physical node coordinates, shape (panels, degree)."""
        t, _, _ = chebyshev_tools(self.degree)
        centres = 0.5 * (self.lefts + self.rights)
        half = 0.5 * (self.rights - self.lefts)
        return centres[:, None] + half[:, None] * t[None, :]

    def _gap_after(self) -> np.ndarray:
        """Indices of panels followed by an uncovered gap."""
        return np.flatnonzero(self.rights[:-1] < self.lefts[1:])

    def _gap_integral(self, values: np.ndarray, index: int) -> float:
        if self.singular_exponent is None:
            return 0.0
        e1 = self.singular_exponent + 1.0
        left_edge = self.rights[index]
        right_edge = self.lefts[index + 1]
        return (values[index, -1] * abs(left_edge) + values[index + 1, 0] * abs(right_edge)) / e1

    def cumulative(self, values: np.ndarray) -> np.ndarray:
        """
        Running integral from the left end, at every node.

        Args:
            values: Integrand at the nodes, shape (panels, degree)
        """
        _, smat, _ = chebyshev_tools(self.degree)
        half = 0.5 * (self.rights - self.lefts)
        local = (values @ smat.T) * half[:, None]
        totals = local[:, -1].copy()
        for index in self._gap_after():
            totals[index] += self._gap_integral(values, index)
        offsets = np.empty(self.panel_count)
        # Neumaier summation of the panel totals
        running, compensation = 0.0, 0.0
        for i in range(self.panel_count):
            offsets[i] = running + compensation
            value = totals[i]
            total = running + value
            if abs(running) >= abs(value):
                compensation += (running - total) + value
            else:
                compensation += (value - total) + running
            running = total
        return local + offsets[:, None]

    def integrate(self, values: np.ndarray) -> float:
        """Integral over the whole grid."""
        _, smat, _ = chebyshev_tools(self.degree)
        half = 0.5 * (self.rights - self.lefts)
        totals = (values @ smat[-1]) * half
        gap_terms = [self._gap_integral(values, i) for i in self._gap_after()]
        return math.fsum(totals.tolist() + gap_terms)

    def interpolate(self, values: np.ndarray, x) -> np.ndarray:
        """
        Evaluate the piecewise Chebyshev interpolant of node values.

        Points inside the gap next to 0 are interpolated linearly between
        the gap edges.

        Raises:
            DomainError: If any x lies outside the grid
        """
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs < self.lefts[0] - 1e-14 * abs(self.lefts[0])) or \
                np.any(xs > self.rights[-1] + 1e-14 * abs(self.rights[-1])):
            raise DomainError("interpolation point outside the collocation grid")
        _, _, vinv = chebyshev_tools(self.degree)
        coeffs = values @ vinv.T
        idx = np.clip(np.searchsorted(self.rights, xs), 0, self.panel_count - 1)
        inside = xs >= self.lefts[idx]
        centres = 0.5 * (self.lefts[idx] + self.rights[idx])
        half = 0.5 * (self.rights[idx] - self.lefts[idx])
        t = np.clip((xs - centres) / half, -1.0, 1.0)
        out = np.einsum('ij,ij->i', cheb.chebvander(t, self.degree - 1), coeffs[idx])
        if not np.all(inside):
            # x in a gap: idx is the panel to the right of it
            j = idx[~inside]
            xl, xr = self.rights[j - 1], self.lefts[j]
            vl, vr = values[j - 1, -1], values[j, 0]
            out[~inside] = vl + (vr - vl) * (xs[~inside] - xl) / (xr - xl)
        if np.ndim(x) == 0:
            return float(out[0])
        return out


def build_panel_grid(x0: float, x1: float, settings: Optional[QuadratureSettings] = None, *,
                     floor: Optional[float] = None, singular_exponent: Optional[float] = None,
                     degree: int = 20) -> PanelGrid:
    """
    Collocation grid on [x0, x1] graded toward 0.

    Args:
        x0: Left end
        x1: Right end
        settings: Grading ratio, oscillation scale and panel budget
        floor: Half-width of the uncovered gap at 0 (default from tolerance)
        singular_exponent: Local power of the integrands near 0
        degree: Chebyshev-Lobatto nodes per panel

    Raises:
        QuadratureBudgetError: If the grid needs more than max_panels panels
    """
    settings = settings or QuadratureSettings()
    span = x1 - x0
    if floor is None:
        floor = singular_floor(span, settings.tol, singular_exponent)
    pieces, gaps = graded_breakpoints(
        x0, x1, ratio=settings.grading_ratio, floor=floor, width_cap=settings.width_cap(span)
    )
    if not pieces:
        raise DomainError("interval lies entirely inside the singular gap")
    lefts = np.concatenate([p[:-1] for p in pieces])
    rights = np.concatenate([p[1:] for p in pieces])
    if lefts.size > settings.max_panels:
        raise QuadratureBudgetError(f"collocation grid needs {lefts.size} panels")
    logger.debug("panel grid on [%g, %g]: %d panels, floor %.3e", x0, x1, lefts.size, floor)
    return PanelGrid(lefts=lefts, rights=rights, degree=degree,
                     gaps=tuple(gaps), singular_exponent=singular_exponent)


__all__ = [
    'QuadratureSettings',
    'QuadratureResult',
    'PanelGrid',
    'build_panel_grid',
    'chebyshev_tools',
    'graded_breakpoints',
    'integrate_singular',
    'singular_floor',
]
