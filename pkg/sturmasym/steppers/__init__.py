"""
Built-in steppers.

STEPPERS maps a method name to the stepper used away from the singular
point; steppers with covers_singularity integrate across it themselves.
"""

from sturmasym.steppers.fixed import FixedMeshRK4Stepper
from sturmasym.steppers.picard import PicardPanelStepper
from sturmasym.steppers.runge_kutta import CashKarpStepper
from sturmasym.steppers.spectral import ChebyshevPicardStepper

STEPPERS = {
    'hybrid': CashKarpStepper,
    'spectral': ChebyshevPicardStepper,
    'reference': FixedMeshRK4Stepper,
}

__all__ = [
    'STEPPERS',
    'CashKarpStepper',
    'ChebyshevPicardStepper',
    'FixedMeshRK4Stepper',
    'PicardPanelStepper',
]
