"""Fixed physical constants (CODATA, SI units).

Values come from :mod:`scipy.constants` and are module-level floats so that
they cannot be reconfigured at runtime.
"""

from dataclasses import dataclass

from scipy import constants as _sc

HBAR = _sc.hbar                     # J s
K_B = _sc.k                         # J/K
C_LIGHT = _sc.c                     # m/s
SIGMA_SB = _sc.Stefan_Boltzmann     # W m^-2 K^-4
M_AMU = _sc.physical_constants["atomic mass constant"][0]  # kg, nucleon reference mass
E_CHARGE = _sc.e                    # C

MBAR_TO_PA = 100.0
TWO_PI = 2.0 * _sc.pi


@dataclass(frozen=True)
class Constants:
    hbar: float = HBAR
    k_B: float = K_B
    c: float = C_LIGHT
    sigma_SB: float = SIGMA_SB
    m_amu: float = M_AMU


CONSTANTS = Constants()
