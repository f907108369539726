"""
Eigenvalue estimate record shared by the shooting, oracle and asymptotic solvers.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict

from sturmasym.core.errors import NonFiniteCoefficientError, ValidationError


@dataclass(frozen=True)
class EigenEstimate:
    """
    One computed eigenvalue.

    Attributes:
        n: Eigenvalue index (0-based)
        lam: The eigenvalue
        method: "shooting", "oracle" or "asymptotic-N"
        residual: Final mismatch at lam (angle units)
        order: Expansion order N (0 for direct solvers)
        error_bound: Estimated absolute error of lam
    """

    n: int
    lam: float
    method: str
    residual: float
    order: int = 0
    error_bound: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.residual)):
            raise NonFiniteCoefficientError(
                f"non-finite eigenvalue estimate for n={self.n}: {self.lam}, residual {self.residual}"
            )
        if self.lam <= 0:
            raise ValidationError(f"eigenvalue estimate for n={self.n} must be positive, got {self.lam}")

    @property
    def sqrt_lam(self) -> float:
        return math.sqrt(self.lam)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n': self.n,
            'lambda': self.lam,
            'method': self.method,
            'residual': self.residual,
            'order': self.order,
            'errorBound': self.error_bound,
        }
