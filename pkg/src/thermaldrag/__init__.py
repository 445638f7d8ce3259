"""Damping and diffusion of atoms in a thermal radiation background."""

__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .constants import NATURAL, SI, PhysicalConstants
from .drag import DragCurve, drag_curve, exact_drag_force, linear_response_slope
from .errors import (
    DomainError,
    GridTooNarrowError,
    NumericalError,
    SpeciesParseError,
    ThermalDragError,
)
from .fokker_planck import (
    DistributionState,
    MomentumGrid,
    evolve,
    gaussian_state,
    stationary_solution,
)
from .frame import (
    FrameSpec,
    compensating_force,
    infer_lab_velocity,
    lab_frame_force,
    measure_compensating_force,
)
from .langevin import SimConfig, TrajectoryStats, run_ensemble, step
from .physics import (
    MultilevelAtom,
    ThermalEnvironment,
    Transition,
    TransportCoefficients,
    TwoLevelAtom,
    bose_derivative,
    bose_occupation,
    damping_coefficient,
    diffusion_coefficient,
    level_populations,
    multilevel_coefficients,
    sigma_z_expectation,
    spontaneous_rate,
    two_level_coefficients,
)
from .species import load_species, loads_species
