"""Collapse-model (CSL) heating budget for a Paul-trapped nanosphere."""

__version__ = "0.1.0"

from .physics import (CslParams, EfieldReference, Environment, NoiseBudget, Sphere, Trap,
                      alpha_sphere, assemble_budget, csl_diffusion)
from .dynamics import (EvolutionParams, MomentState, Trajectory, integrate_moments,
                       phonon_closed_form)
from .scenario import Scenario

__all__ = [
    "CslParams", "EfieldReference", "Environment", "NoiseBudget", "Sphere", "Trap",
    "alpha_sphere", "assemble_budget", "csl_diffusion", "EvolutionParams", "MomentState",
    "Trajectory", "integrate_moments", "phonon_closed_form", "Scenario",
]
