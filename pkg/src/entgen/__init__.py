"""Exact simulation and optimization of entanglement generation with
passive linear optics: Fock evolution via permanents, heralded detection,
Schmidt/entropy analysis, closed-form bounds, and unitary search."""

from .bounds import (
    BoundReport,
    bunched_entropy,
    dimensionality_bound,
    jensen_log3_bound,
    linearity_bound,
    mean_constrained_entropy_bound,
)
from .entangle import (
    SchmidtSpectrum,
    average_entanglement,
    dual_rail_project,
    entropy,
    schmidt_spectrum,
)
from .errors import CapacityError, ConfigError, DomainError, EntgenError, FixtureError
from .fock import FockBasis, dimension, enumerate_basis, format_occupation, split
from .optimize import (
    OptimizationProblem,
    OptimizationResult,
    bell_cost,
    dual_rail_ent_yield,
    minimize,
    neg_avg_entanglement,
)
from .permanent import build_transition, permanent
from .simulate import (
    ExperimentSetup,
    HeraldedState,
    amplitude,
    amplitude_vector,
    full_output,
    herald_all,
    herald_patterns,
    particle_coefficient,
)
from .unitary import (
    BS2_THETA,
    Interferometer,
    UnitaryParams,
    embed,
    fixture,
    haar_sample,
    params_from_unitary,
    realize,
)

__all__ = [
    "BS2_THETA",
    "BoundReport",
    "CapacityError",
    "ConfigError",
    "DomainError",
    "EntgenError",
    "ExperimentSetup",
    "FixtureError",
    "FockBasis",
    "HeraldedState",
    "Interferometer",
    "OptimizationProblem",
    "OptimizationResult",
    "SchmidtSpectrum",
    "UnitaryParams",
    "amplitude",
    "amplitude_vector",
    "average_entanglement",
    "bell_cost",
    "build_transition",
    "bunched_entropy",
    "dimension",
    "dimensionality_bound",
    "dual_rail_ent_yield",
    "dual_rail_project",
    "embed",
    "entropy",
    "enumerate_basis",
    "fixture",
    "format_occupation",
    "full_output",
    "haar_sample",
    "herald_all",
    "herald_patterns",
    "jensen_log3_bound",
    "linearity_bound",
    "mean_constrained_entropy_bound",
    "minimize",
    "neg_avg_entanglement",
    "params_from_unitary",
    "particle_coefficient",
    "permanent",
    "realize",
    "schmidt_spectrum",
    "split",
]

__version__ = "0.1.0"
