"""blowuplab: a numerical laboratory for finite-time blowup criteria and
conjugate-point diagnostics of fixed-point strain dynamics in axisymmetric
ideal flow."""

__version__ = "0.1.0"

from .scenario import (  # noqa: F401
    BandConstantProfile,
    ConstantProfile,
    DerivedFromTrace,
    FixedPointScenario,
    PiecewiseLinearProfile,
    PoleScaledProfile,
    SolverTolerances,
    SwirlConstants,
    validate_scenario,
)
from .solution import IndexFormResult, JacobiSolution, StretchMatrix, Terminated, VariationField  # noqa: F401
