"""Symplectic point vortices in R^{2m}: dynamics, invariants, integrators,
integrability diagnostics and a 2D torus vorticity solver."""
from ._jit import HAS_NUMBA
from .core import (
    COLLISION_EPS,
    ComplexStructure,
    KernelConstant,
    SingularConfigurationError,
    VortexSystem,
    hamiltonian,
    hamiltonian_gradient,
    kernel_constant,
    random_system,
    velocities,
)
from .integrators import IntegratorConfig, StepFailure, TrajectoryRecord, integrate, step, step_with_tangent
from .observables import InvariantSuite, Observable, bracket_table, involutive_family, poisson_bracket, standard_invariants

__version__ = "0.1.0"

__all__ = [
    "COLLISION_EPS",
    "ComplexStructure",
    "HAS_NUMBA",
    "IntegratorConfig",
    "InvariantSuite",
    "KernelConstant",
    "Observable",
    "SingularConfigurationError",
    "StepFailure",
    "TrajectoryRecord",
    "VortexSystem",
    "bracket_table",
    "hamiltonian",
    "hamiltonian_gradient",
    "integrate",
    "involutive_family",
    "kernel_constant",
    "poisson_bracket",
    "random_system",
    "standard_invariants",
    "step",
    "step_with_tangent",
    "velocities",
]
