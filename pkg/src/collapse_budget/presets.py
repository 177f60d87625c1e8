"""Named scenarios: the baseline heating comparison, four one-axis sweeps and the testable-bound grid.

Common parameters: n0 = 50, R = 100 nm, P = 1e-12 mbar, f_m = 5 kHz,
rho = 2300 kg/m^3, T_env = 4 K, T_int = 65 K, lambda = 1e-8 Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig, parse_config

BASE_RAW = {
    "sphere": {"radius_nm": 100.0, "density_kg_m3": 2300.0},
    "environment": {"pressure_mbar": 1e-12, "t_env_k": 4.0, "t_int_k": 65.0},
    "trap": {"omega_m_hz": 5000.0},
    "csl": {"lambda_csl_hz": 1e-8, "r_c_nm": 100.0},
    "n0": 50,
    "t_evolve_s": 1.0,
    "seed": 0,
}


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    raw: dict = field(default_factory=lambda: dict(BASE_RAW))
    sweep: tuple | None = None        # (axis, lo, hi, points, scale), SI units
    pressures_mbar: tuple | None = None
    tints: tuple | None = None

    def config(self) -> ScenarioConfig:
        return parse_config(self.raw)


def _log(lo, hi, n):
    return tuple(float(v) for v in np.geomspace(lo, hi, n))


PRESETS = {
    p.name: p for p in (
        Preset("fig2", "Heating over 1 s with and without CSL (lambda = 1e-8 Hz)."),
        Preset("fig3a", "Phonons after 1 s versus background pressure.",
               sweep=("pressure", 1e-12, 1e-4, 81, "log")),
        Preset("fig3b", "Phonons after 1 s versus internal temperature.",
               sweep=("T_int", 4.0, 300.0, 61, "log")),
        Preset("fig3c", "Phonons after 1 s versus secular frequency.",
               sweep=("omega_m", 2 * np.pi * 1e2, 2 * np.pi * 1e6, 61, "log")),
        Preset("fig3d", "Phonons after 1 s versus sphere radius.",
               sweep=("radius", 1e-9, 1e-5, 81, "log")),
        Preset("fig4", "Smallest testable lambda versus pressure for several T_int "
                       "(ratio >= 1.2 after 100 s, n0 = 50, R and f_m optimised).",
               pressures_mbar=_log(1e-13, 1e-9, 20), tints=(20.0, 40.0, 60.0, 80.0)),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
