"""Heating and damping rates for a levitated nanosphere.

Every rate is returned in SI units: damping constants in 1/s and momentum
diffusion in phonons/s. Angular frequencies are in rad/s throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .constants import C_LIGHT, E_CHARGE, HBAR, K_B, M_AMU, SIGMA_SB

#: Im[(eps-1)/(eps+2)] at thermal wavelengths. Calibrated (not measured) so
#: that the blackbody diffusion at R=100 nm, rho=2300 kg/m^3,
#: omega_m=2*pi*5 kHz, T_env=4 K, T_int=65 K equals 350 phonons/s.
#: See :func:`calibrate_bb_response`. The huge magnitude absorbs the
#: dimensional mismatch of the damping expression, which is kept verbatim.
BB_RESPONSE_IM_CALIBRATED = 2.952e136

#: Molecular hydrogen, the default residual gas.
H2_MASS = 2.01588 * M_AMU

#: Switch point (in x = R^2/r_c^2) between the series and closed form of alpha.
ALPHA_SERIES_THRESHOLD = 1e-2

GAS_CONVENTIONS = ("main", "si")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _finite(name: str, value: float) -> None:
    _require(math.isfinite(value), f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Sphere:
    """Homogeneous dielectric nanosphere.

    Mass and volume are derived properties.
    """

    radius: float = 100e-9
    density: float = 2300.0
    eps1: float = 2.1
    eps2: float = 1e-7
    bb_response_im: float = BB_RESPONSE_IM_CALIBRATED
    emissivity: float = 1.0
    charge: float = E_CHARGE

    def __post_init__(self):
        for f in fields(self):
            _finite(f.name, getattr(self, f.name))
        _require(self.radius > 0, f"radius must be > 0, got {self.radius!r}")
        _require(self.density > 0, f"density must be > 0, got {self.density!r}")
        _require(self.eps2 >= 0, f"eps2 must be >= 0, got {self.eps2!r}")
        _require(self.bb_response_im >= 0,
                 f"bb_response_im must be >= 0, got {self.bb_response_im!r}")
        _require(0 <= self.emissivity <= 1,
                 f"emissivity must lie in [0, 1], got {self.emissivity!r}")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius**3

    @property
    def mass(self) -> float:
        return sphere_mass(self)


@dataclass(frozen=True)
class Environment:
    T_env: float = 4.0
    pressure: float = 1e-10
    gas_mass: float = H2_MASS
    T_int: float = 65.0

    def __post_init__(self):
        for f in fields(self):
            _finite(f.name, getattr(self, f.name))
        _require(self.T_env >= 0, f"T_env must be >= 0, got {self.T_env!r}")
        _require(self.pressure >= 0, f"pressure must be >= 0, got {self.pressure!r}")
        _require(self.gas_mass > 0, f"gas_mass must be > 0, got {self.gas_mass!r}")
        _require(self.T_int >= 0, f"T_int must be >= 0, got {self.T_int!r}")


@dataclass(frozen=True)
class Trap:
    omega_m: float = 2 * math.pi * 5e3

    def __post_init__(self):
        _finite("omega_m", self.omega_m)
        _require(self.omega_m > 0, f"omega_m must be > 0, got {self.omega_m!r}")


@dataclass(frozen=True)
class CslParams:
    lambda_csl: float = 1e-8
    r_c: float = 100e-9

    def __post_init__(self):
        _finite("lambda_csl", self.lambda_csl)
        _finite("r_c", self.r_c)
        _require(self.lambda_csl >= 0, f"lambda_csl must be >= 0, got {self.lambda_csl!r}")
        _require(self.r_c > 0, f"r_c must be > 0, got {self.r_c!r}")


@dataclass(frozen=True)
class EfieldReference:
    """A measured electric-field heating rate in a reference trap.

    Defaults describe a single-charged 88Sr+ ion at 1 MHz heating at
    10 phonons/s.
    """

    rate: float = 10.0
    charge: float = E_CHARGE
    mass: float = 87.9056 * M_AMU
    omega: float = 2 * math.pi * 1e6

    def __post_init__(self):
        for f in fields(self):
            _finite(f.name, getattr(self, f.name))
        _require(self.rate >= 0, f"rate must be >= 0, got {self.rate!r}")
        for name in ("charge", "mass", "omega"):
            _require(getattr(self, name) > 0, f"reference {name} must be > 0")


@dataclass(frozen=True)
class NoiseBudget:
    """Per-source diffusion (phonons/s) and damping (1/s) rates.

    ``D_diff_total`` and ``Gamma_total`` are derived from the components.
    """

    D_gas: float
    D_bb: float
    D_csl: float
    D_efield: float
    gamma_gas: float
    gamma_bb_e: float
    gamma_bb_a: float
    D_pos: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            _require(v >= 0 and math.isfinite(v), f"{f.name} must be finite and >= 0, got {v!r}")

    @property
    def D_diff_total(self) -> float:
        return self.D_gas + self.D_bb + self.D_csl + self.D_efield

    @property
    def Gamma_total(self) -> float:
        return (self.gamma_gas + self.gamma_bb_e + self.gamma_bb_a) / 4.0

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["D_diff_total"] = self.D_diff_total
        d["Gamma_total"] = self.Gamma_total
        return d


def sphere_mass(sphere: Sphere) -> float:
    """Mass of a solid sphere, (4/3) pi R^3 d, in kg."""
    _require(sphere.radius > 0 and sphere.density > 0, "radius and density must be > 0")
    return 4.0 / 3.0 * math.pi * sphere.radius**3 * sphere.density


def _alpha_bracket_scaled(x: float) -> float:
    """6/x^3 * [e^-x - 1 + (x/2)(e^-x + 1)], the size reduction factor of alpha."""
    if x < ALPHA_SERIES_THRESHOLD:
        # 6 * (x^3/12 - x^4/24 + x^5/80 - x^6/360) / x^3
        return 0.5 - x / 4.0 + 3.0 * x * x / 40.0 - x**3 / 60.0
    em1 = math.expm1(-x)
    return 6.0 * (em1 * (1.0 + 0.5 * x) + x) / x**3


def alpha_sphere(R: float, r_c: float, mass: float) -> float:
    """Geometry factor converting the single-nucleon CSL rate to a sphere.

    Parameters
    ----------
    R : float
        Sphere radius in m.
    r_c : float
        CSL correlation length in m.
    mass : float
        Sphere mass in kg.

    Returns
    -------
    float
        ``(m/m0)^2 * 6/x^3 * [e^-x - 1 + (x/2)(e^-x + 1)]`` with ``x = R^2/r_c^2``
        and ``m0`` one atomic mass unit. Tends to ``(m/m0)^2 / 2`` for small
        spheres and ``3 (m/m0)^2 (r_c/R)^4`` for large ones.
    """
    _require(R > 0 and r_c > 0 and mass > 0, "R, r_c and mass must all be > 0")
    x = (R / r_c) ** 2
    return (mass / M_AMU) ** 2 * _alpha_bracket_scaled(x)


def csl_diffusion(sphere: Sphere, trap: Trap, csl: CslParams) -> float:
    """CSL momentum diffusion in phonons/s: hbar/(m w) * lambda/r_c^2 * alpha."""
    m = sphere.mass
    if csl.lambda_csl == 0.0:
        return 0.0
    alpha = alpha_sphere(sphere.radius, csl.r_c, m)
    return HBAR / (m * trap.omega_m) * csl.lambda_csl / csl.r_c**2 * alpha


def mean_gas_speed(T: float, gas_mass: float) -> float:
    """Mean Maxwell-Boltzmann speed sqrt(8 k T / (pi m)) in m/s."""
    _require(gas_mass > 0, f"gas_mass must be > 0, got {gas_mass!r}")
    _require(T >= 0, f"temperature must be >= 0, got {T!r}")
    return math.sqrt(8.0 * K_B * T / (math.pi * gas_mass))


def gas_damping(env: Environment, sphere: Sphere) -> float:
    """Gas-collision damping 16 P / (pi v_g R d) in 1/s."""
    if env.pressure == 0.0:
        return 0.0
    _require(env.T_env > 0, "T_env must be > 0 when the pressure is nonzero")
    v_g = mean_gas_speed(env.T_env, env.gas_mass)
    return 16.0 * env.pressure / (math.pi * v_g * sphere.radius * sphere.density)


def gas_diffusion(gamma_g: float, env: Environment, trap: Trap,
                  convention: str = "main") -> float:
    """Gas-collision diffusion gamma_g k_B T_env / (2 hbar w_m).

    ``convention="si"`` drops the factor 1/2.
    """
    _require(gamma_g >= 0, f"gamma_g must be >= 0, got {gamma_g!r}")
    if convention not in GAS_CONVENTIONS:
        raise ValueError(f"unknown gas_diffusion_convention {convention!r}")
    denom = (2.0 if convention == "main" else 1.0) * HBAR * trap.omega_m
    return gamma_g * K_B * env.T_env / denom


def bb_damping(T_i: float, sphere: Sphere, trap: Trap) -> float:
    """Blackbody damping (2 pi^4/63) (k T)^6 / (c^5 hbar d w_m) * Im[..].

    Called with the environment temperature for absorption and the internal
    temperature for emission.
    """
    _require(T_i >= 0, f"temperature must be >= 0, got {T_i!r}")
    return (2.0 * math.pi**4 / 63.0 * (K_B * T_i) ** 6
            / (C_LIGHT**5 * HBAR * sphere.density * trap.omega_m)
            * sphere.bb_response_im)


def bb_diffusion(gamma_bb_e: float, gamma_bb_a: float, env: Environment, trap: Trap) -> float:
    """Blackbody diffusion k_B (g_e T_int + g_a T_env) / (2 hbar w_m)."""
    _require(gamma_bb_e >= 0 and gamma_bb_a >= 0, "blackbody damping rates must be >= 0")
    return K_B * (gamma_bb_e * env.T_int + gamma_bb_a * env.T_env) / (2.0 * HBAR * trap.omega_m)


def efield_heating_translate(ref_rate, ref_q, ref_mass, ref_omega, sphere: Sphere, trap: Trap) -> float:
    """Scale a measured electric-field heating rate to the nanosphere.

    The rate scales as q^2 / (m w_m) at fixed field-noise spectrum.
    """
    _require(ref_rate >= 0, "reference rate must be >= 0")
    _require(ref_q != 0 and ref_mass > 0 and ref_omega > 0,
             "reference charge, mass and frequency must be nonzero and positive")
    return ref_rate * (sphere.charge**2 * ref_mass * ref_omega) / (
        ref_q**2 * sphere.mass * trap.omega_m)


def bulk_temperature(I0: float, lambda_laser: float, sphere: Sphere, env: Environment) -> float:
    """Steady-state internal temperature of a laser-heated sphere in K."""
    _require(I0 >= 0, f"I0 must be >= 0, got {I0!r}")
    _require(lambda_laser > 0, f"lambda_laser must be > 0, got {lambda_laser!r}")
    absorb = 3.0 * sphere.eps2 / ((sphere.eps1 + 2.0) ** 2 + sphere.eps2**2)
    if I0 == 0.0 or absorb == 0.0:
        return env.T_env
    _require(sphere.emissivity > 0, "emissivity must be > 0 for a heated sphere")
    heat = I0 * 4.0 * math.pi**3 * sphere.radius / (sphere.emissivity * SIGMA_SB * lambda_laser) * absorb
    return (heat + env.T_env**4) ** 0.25


def assemble_budget(sphere: Sphere, env: Environment, trap: Trap, csl: CslParams,
                    efield_ref: EfieldReference | None = None,
                    gas_convention: str = "main", D_pos: float = 0.0) -> NoiseBudget:
    """Collect every heating and damping source into a :class:`NoiseBudget`."""
    g_gas = gas_damping(env, sphere)
    g_e = bb_damping(env.T_int, sphere, trap)
    g_a = bb_damping(env.T_env, sphere, trap)
    if efield_ref is None:
        d_e = 0.0
    else:
        d_e = efield_heating_translate(efield_ref.rate, efield_ref.charge, efield_ref.mass,
                                       efield_ref.omega, sphere, trap)
    return NoiseBudget(
        D_gas=gas_diffusion(g_gas, env, trap, gas_convention),
        D_bb=bb_diffusion(g_e, g_a, env, trap),
        D_csl=csl_diffusion(sphere, trap, csl),
        D_efield=d_e,
        gamma_gas=g_gas,
        gamma_bb_e=g_e,
        gamma_bb_a=g_a,
        D_pos=D_pos,
    )


def calibrate_bb_response(target: float = 350.0, sphere: Sphere | None = None,
                          env: Environment | None = None, trap: Trap | None = None) -> float:
    """Return the Im[(eps-1)/(eps+2)] giving ``target`` phonons/s of blackbody diffusion.

    Blackbody diffusion is linear in the response, so one evaluation at unit
    response suffices. Defaults are the R=100 nm, 5 kHz, 4 K / 65 K scenario.
    """
    sphere = Sphere(bb_response_im=1.0) if sphere is None else sphere
    env = Environment() if env is None else env
    trap = Trap() if trap is None else trap
    from dataclasses import replace
    unit = replace(sphere, bb_response_im=1.0)
    per_unit = bb_diffusion(bb_damping(env.T_int, unit, trap), bb_damping(env.T_env, unit, trap), env, trap)
    return target / per_unit
