"""A complete free-evolution scenario: particle, environment, trap, CSL and timing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .dynamics import EvolutionParams, phonon_closed_form
from .physics import (CslParams, EfieldReference, Environment, GAS_CONVENTIONS, NoiseBudget,
                      Sphere, Trap, assemble_budget)

#: Sweepable scenario parameters and their SI units.
AXES = {
    "pressure": "Pa",
    "T_int": "K",
    "omega_m": "rad/s",
    "radius": "m",
    "lambda_csl": "1/s",
    "t_evolve": "s",
}


@dataclass(frozen=True)
class Scenario:
    sphere: Sphere = field(default_factory=Sphere)
    environment: Environment = field(default_factory=Environment)
    trap: Trap = field(default_factory=Trap)
    csl: CslParams = field(default_factory=CslParams)
    n0: float = 50.0
    t_evolve: float = 1.0
    efield_ref: EfieldReference | None = None
    gas_convention: str = "main"
    D_pos: float = 0.0

    def __post_init__(self):
        if not (self.n0 >= 0 and math.isfinite(self.n0)):
            raise ValueError(f"n0 must be finite and >= 0, got {self.n0!r}")
        if not (self.t_evolve >= 0 and math.isfinite(self.t_evolve)):
            raise ValueError(f"t_evolve must be finite and >= 0, got {self.t_evolve!r}")
        if self.gas_convention not in GAS_CONVENTIONS:
            raise ValueError(f"gas_convention must be one of {GAS_CONVENTIONS}, "
                             f"got {self.gas_convention!r}")
        if not self.D_pos >= 0:
            raise ValueError(f"D_pos must be >= 0, got {self.D_pos!r}")

    def budget(self, lambda_csl: float | None = None) -> NoiseBudget:
        csl = self.csl if lambda_csl is None else replace(self.csl, lambda_csl=lambda_csl)
        return assemble_budget(self.sphere, self.environment, self.trap, csl,
                               self.efield_ref, self.gas_convention, self.D_pos)

    def evolution(self, budget: NoiseBudget) -> EvolutionParams:
        return EvolutionParams.from_budget(budget, self.trap.omega_m)

    def final_phonons(self, budget: NoiseBudget, t: float | None = None) -> float:
        return phonon_closed_form(self.n0, self.evolution(budget),
                                  self.t_evolve if t is None else t)

    def with_axis(self, axis: str, value: float) -> "Scenario":
        """Copy of the scenario with one sweep axis set to ``value`` (SI units)."""
        if axis == "pressure":
            return replace(self, environment=replace(self.environment, pressure=value))
        if axis == "T_int":
            return replace(self, environment=replace(self.environment, T_int=value))
        if axis == "omega_m":
            return replace(self, trap=Trap(value))
        if axis == "radius":
            return replace(self, sphere=replace(self.sphere, radius=value))
        if axis == "lambda_csl":
            return replace(self, csl=replace(self.csl, lambda_csl=value))
        if axis == "t_evolve":
            return replace(self, t_evolve=value)
        raise ValueError(f"unknown axis {axis!r}; expected one of {sorted(AXES)}")
