"""Numerical laboratory for the eight-port homodyne detector.

Simulates the four-mode detector on truncated Fock spaces, computes the
measured phase-space observable by a direct and a factorized route, and
compares it with the covariant phase-space observable it approaches as the
reference amplitude grows.
"""

from .convergence import (
    AmplitudeSchedule,
    ConvergenceReport,
    boundary_null_rectangles,
    convergence_sweep,
    weak_convergence_check,
)
from .eightport import DetectorConfig, GStatistics, g_rectangle, run_direct, run_factorized
from .fock import DensityOperator, StateVector, coherent_state, displacement, weyl
from .homodyne import HomodyneObservable, homodyne_probability, quadrature_probability
from .phasespace import PhaseSpaceMeasure, conjugate_state, density, lemma2_rhs, rectangle_probability
from .sets import Interval, Rectangle
from .states import StateSpec

__version__ = "0.1.0"

__all__ = [
    "AmplitudeSchedule",
    "ConvergenceReport",
    "DensityOperator",
    "DetectorConfig",
    "GStatistics",
    "HomodyneObservable",
    "Interval",
    "PhaseSpaceMeasure",
    "Rectangle",
    "StateSpec",
    "StateVector",
    "boundary_null_rectangles",
    "coherent_state",
    "conjugate_state",
    "convergence_sweep",
    "density",
    "displacement",
    "g_rectangle",
    "homodyne_probability",
    "lemma2_rhs",
    "quadrature_probability",
    "rectangle_probability",
    "run_direct",
    "run_factorized",
    "weak_convergence_check",
    "weyl",
]
