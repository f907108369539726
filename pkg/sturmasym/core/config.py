"""
Run configuration for the command-line studies.

RunConfig is built from parsed flags, validated on construction and
serialized alongside results so a JSON output file records what produced it.
"""

import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

from sturmasym.core.errors import ValidationError
from sturmasym.core.potential import PotentialSpec
from sturmasym.core.prufer import BoundaryConditions

THREADS_ENV = "STURM_ASYM_THREADS"

COMMANDS = ('eigen', 'asym', 'sweep', 'dump-regularizer', 'check-conditions')
METHODS = ('shooting', 'oracle')
STEPPER_NAMES = ('hybrid', 'spectral', 'reference')
FORMATS = ('csv', 'json')


def resolve_threads(environ: Optional[Dict[str, str]] = None) -> int:
    """
    Worker count from STURM_ASYM_THREADS (0 or unset means one per CPU).

    Raises:
        ValidationError: If the variable is not a nonnegative integer
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        threads = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV} must be an integer, got '{raw}'") from None
    if threads < 0:
        raise ValidationError(f"{THREADS_ENV} must be >= 0, got {threads}")
    return threads or (os.cpu_count() or 1)


@dataclass(frozen=True)
class RunConfig:
    """
    One CLI invocation.

    Attributes:
        command: Subcommand name
        C, K, a, b: Problem instance
        alpha, beta: Boundary angles
        n_min, n_max: Index range for eigen / asym
        order: Expansion order N
        tol: Solver tolerance
        method: Direct solver for eigen ("shooting" or "oracle")
        stepper: Prufer stepper name
        target: Asymptotic target ("leading" or "exact")
        chain_depth: Regularizer depth override
        fmt: Output format
        out: Output path (None = stdout)
        ladder_start, ladder_factor, ladder_count: Geometric lambda ladder for sweep
    """

    command: str = 'eigen'
    C: float = 0.0
    K: float = 1.0
    a: float = -1.0
    b: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    n_min: int = 0
    n_max: int = 5
    order: int = 1
    tol: float = 1e-10
    method: str = 'shooting'
    stepper: str = 'hybrid'
    target: str = 'leading'
    chain_depth: Optional[int] = None
    fmt: str = 'csv'
    out: Optional[str] = None
    ladder_start: float = 100.0
    ladder_factor: float = 10.0
    ladder_count: int = 5

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command '{self.command}'")
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}, got '{self.method}'")
        if self.stepper not in STEPPER_NAMES:
            raise ValidationError(f"stepper must be one of {STEPPER_NAMES}, got '{self.stepper}'")
        if self.target not in ('leading', 'exact'):
            raise ValidationError(f"target must be 'leading' or 'exact', got '{self.target}'")
        if self.fmt not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}, got '{self.fmt}'")
        if self.n_min < 0 or self.n_max < self.n_min:
            raise ValidationError(f"need 0 <= n-min <= n-max, got {self.n_min}, {self.n_max}")
        if self.order < 1:
            raise ValidationError(f"order N must be >= 1, got {self.order}")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise ValidationError(f"tolerance must be positive, got {self.tol}")
        if self.chain_depth is not None and self.chain_depth < 1:
            raise ValidationError(f"chain depth must be >= 1, got {self.chain_depth}")
        if self.command == 'sweep':
            if not self.ladder_start > 0:
                raise ValidationError(f"ladder start must be positive, got {self.ladder_start}")
            if not self.ladder_factor > 1:
                raise ValidationError(f"ladder factor must exceed 1, got {self.ladder_factor}")
            if self.ladder_count < 1:
                raise ValidationError(f"ladder count must be >= 1, got {self.ladder_count}")
        # builds and validates the problem data
        self.potential
        self.boundary

    @property
    def potential(self) -> PotentialSpec:
        return PotentialSpec(C=self.C, K=self.K, a=self.a, b=self.b)

    @property
    def boundary(self) -> BoundaryConditions:
        return BoundaryConditions(alpha=self.alpha, beta=self.beta)

    @property
    def indices(self) -> range:
        return range(self.n_min, self.n_max + 1)

    @property
    def ladder(self) -> list:
        return [self.ladder_start * self.ladder_factor ** k for k in range(self.ladder_count)]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in known})
