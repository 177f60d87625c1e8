"""Cavity cooling before free evolution.

Sideband cooling in the hybrid Paul/optical trap sets the occupation of the
optical-well mode; switching the optical field off maps that occupation onto
the secular (Paul trap) mode. Red detuning is ``Delta < 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields

from scipy import special

from .constants import C_LIGHT, HBAR
from .physics import Environment, Sphere, bulk_temperature

#: Largest trap-centre misalignment for which the displacement kick stays small.
MAX_ALIGNMENT_OFFSET = 0.5e-9

_LAMBDA_DEFAULT = 1064e-9
_CAVITY_LENGTH = 1e-2
_FINESSE = 1e5
_WAIST = 50e-6


@dataclass(frozen=True)
class CavityParams:
    """Cavity and drive parameters of the cooling stage (SI, angular frequencies).

    Defaults: 1 cm cavity of finesse 1e5 at 1064 nm, 50 um waist, 200 kHz
    optical-well frequency, 5 kHz secular frequency, resonant red detuning.
    """

    kappa: float = math.pi * C_LIGHT / (_CAVITY_LENGTH * _FINESSE)
    kappa_sc: float = 0.0
    Delta: float = -2 * math.pi * 200e3
    omega_c: float = 2 * math.pi * 200e3
    omega_s: float = 2 * math.pi * 5e3
    omega_l: float = 2 * math.pi * C_LIGHT / _LAMBDA_DEFAULT
    k: float = 2 * math.pi / _LAMBDA_DEFAULT
    a_c_sq: float = 1e8
    V_c: float = math.pi * _WAIST**2 * _CAVITY_LENGTH / 4
    X_d: float = 100e-9
    eps_r: float = 2.1
    Gamma_sc: float = 1e3
    Gamma_others: float = 0.0
    N_therm: float = 3.1e7
    delta_x: float = 0.0
    I0: float = 4e8
    lambda_laser: float = _LAMBDA_DEFAULT

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v!r}")
        for name in ("kappa", "omega_c", "omega_s", "omega_l", "k", "V_c", "lambda_laser"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)!r}")
        for name in ("kappa_sc", "a_c_sq", "Gamma_sc", "Gamma_others", "N_therm", "delta_x", "I0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class CoolingResult:
    g_sq: float
    Gamma_minus: float
    N_ss: float
    T_bulk: float
    n0: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def bessel_j0(x: float) -> float:
    """Zeroth-order Bessel function of the first kind."""
    return float(special.j0(x))


def optomech_coupling(cav: CavityParams, sphere: Sphere) -> float:
    """Squared optomechanical coupling g^2 in (rad/s)^2.

    Both permittivities in the Clausius-Mossotti factor are ``cav.eps_r``.
    """
    if cav.V_c <= 0:
        raise ValueError("cavity mode volume must be > 0")
    cm = (cav.eps_r - 1.0) / (cav.eps_r + 2.0)
    drive = (3.0 * sphere.volume / (2.0 * cav.V_c) * cm * cav.omega_l) ** 2
    prefactor = (1.0 - bessel_j0(4.0 * cav.k * cav.X_d)) / (2.0 * sphere.mass * cav.omega_c)
    return prefactor * HBAR * cav.k**2 * cav.a_c_sq * drive


def cooling_rate(g_sq: float, cav: CavityParams) -> float:
    """Time-averaged cooling rate, g^2 k [L(Delta + w_c) - L(Delta - w_c)].

    ``L(x) = 1/(x^2 + kappa^2/4)``. ``Delta`` is laser minus cavity frequency,
    so red detuning (``Delta < 0``) cools. The factor ``k`` (laser
    wavenumber) multiplies the bracket directly; its units are not adjusted.
    """
    if g_sq < 0:
        raise ValueError("g_sq must be >= 0")
    if cav.Delta >= 0:
        warnings.warn("Delta >= 0 is not red-detuned; the cooling rate will not be positive",
                      stacklevel=2)
    q = cav.kappa**2 / 4.0
    return g_sq * cav.k * (1.0 / ((cav.Delta + cav.omega_c) ** 2 + q)
                           - 1.0 / ((cav.Delta - cav.omega_c) ** 2 + q))


def steady_state_phonons(cav: CavityParams, Gamma_minus: float) -> float:
    """Cooled occupation ((kappa+kappa_sc)/(4 w_c))^2 + (G_sc + G_others)/Gamma_minus."""
    if not Gamma_minus > 0:
        raise ValueError(f"Gamma_minus must be > 0, got {Gamma_minus!r}")
    floor = ((cav.kappa + cav.kappa_sc) / (4.0 * cav.omega_c)) ** 2
    return floor + (cav.Gamma_sc + cav.Gamma_others) / Gamma_minus


def cooling_transient(N_therm, N_ss, Gamma_minus, t):
    """Occupation during cooling, relaxing from ``N_therm`` toward ``N_ss``."""
    if min(N_therm, N_ss, Gamma_minus, t) < 0:
        raise ValueError("all arguments must be >= 0")
    decay = math.exp(-Gamma_minus * t)
    return N_therm * decay - N_ss * math.expm1(-Gamma_minus * t)


def initial_phonons(N_ss: float, cav: CavityParams, sphere: Sphere) -> float:
    """Secular-mode occupation right after the optical field is switched off.

    ``N_ss w_c/w_s + m w_s delta_x^2 / (2 hbar)``. Momentum kicks from the
    switch-off can only raise the true value, so this is a lower bound.
    """
    if cav.delta_x > MAX_ALIGNMENT_OFFSET:
        warnings.warn(f"trap-centre offset {cav.delta_x:.3g} m exceeds "
                      f"{MAX_ALIGNMENT_OFFSET:.1g} m; displacement heating will dominate n0",
                      stacklevel=2)
    return (N_ss * cav.omega_c / cav.omega_s
            + sphere.mass * cav.omega_s * cav.delta_x**2 / (2.0 * HBAR))


def run_cooling(cav: CavityParams, sphere: Sphere, env: Environment) -> CoolingResult:
    g_sq = optomech_coupling(cav, sphere)
    gm = cooling_rate(g_sq, cav)
    n_ss = steady_state_phonons(cav, gm)
    return CoolingResult(
        g_sq=g_sq,
        Gamma_minus=gm,
        N_ss=n_ss,
        T_bulk=bulk_temperature(cav.I0, cav.lambda_laser, sphere, env),
        n0=initial_phonons(n_ss, cav, sphere),
    )
