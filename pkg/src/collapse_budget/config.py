"""Strict JSON scenario configuration with unit-suffixed keys.

Every numeric key carries its unit. Each field has one canonical SI key and
may accept alternative units, converted on load::

    {"environment": {"pressure_mbar": 1e-12}}   ->  pressure = 1e-10 Pa
    {"trap": {"omega_m_hz": 5000}}              ->  omega_m = 2 pi 5000 rad/s

Unknown keys are rejected. Missing keys take the defaults of the
corresponding dataclass. :func:`dump_config` writes canonical SI keys only,
so ``load -> dump -> load`` is a fixed point.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .constants import E_CHARGE, M_AMU, MBAR_TO_PA, TWO_PI
from .cooling import CavityParams
from .physics import CslParams, EfieldReference, Environment, Sphere, Trap
from .scenario import Scenario


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


# attribute -> (canonical key, {alternative key: factor to SI})
_SPHERE = {
    "radius": ("radius_m", {"radius_nm": 1e-9}),
    "density": ("density_kg_m3", {}),
    "eps1": ("eps1", {}),
    "eps2": ("eps2", {}),
    "bb_response_im": ("bb_response_im", {}),
    "emissivity": ("emissivity", {}),
    "charge": ("charge_c", {"charge_e": E_CHARGE}),
}
_ENV = {
    "T_env": ("t_env_k", {}),
    "pressure": ("pressure_pa", {"pressure_mbar": MBAR_TO_PA}),
    "gas_mass": ("gas_mass_kg", {"gas_mass_amu": M_AMU}),
    "T_int": ("t_int_k", {}),
}
_TRAP = {"omega_m": ("omega_m_rad_s", {"omega_m_hz": TWO_PI})}
_CSL = {
    "lambda_csl": ("lambda_csl_hz", {}),
    "r_c": ("r_c_m", {"r_c_nm": 1e-9}),
}
_EFIELD = {
    "rate": ("rate_phonons_s", {}),
    "charge": ("charge_c", {"charge_e": E_CHARGE}),
    "mass": ("mass_kg", {"mass_amu": M_AMU}),
    "omega": ("omega_rad_s", {"omega_hz": TWO_PI}),
}
# omega_s is not configurable: it is always the trap secular frequency.
_COOLING = {
    "kappa": ("kappa_rad_s", {"kappa_hz": TWO_PI}),
    "kappa_sc": ("kappa_sc_rad_s", {"kappa_sc_hz": TWO_PI}),
    "Delta": ("delta_rad_s", {"delta_hz": TWO_PI}),
    "omega_c": ("omega_c_rad_s", {"omega_c_hz": TWO_PI}),
    "omega_l": ("omega_l_rad_s", {}),
    "k": ("k_per_m", {}),
    "a_c_sq": ("a_c_sq", {}),
    "V_c": ("v_c_m3", {}),
    "X_d": ("x_d_m", {}),
    "eps_r": ("eps_r", {}),
    "Gamma_sc": ("gamma_sc_phonons_s", {}),
    "Gamma_others": ("gamma_others_phonons_s", {}),
    "N_therm": ("n_therm", {}),
    "delta_x": ("delta_x_m", {"delta_x_nm": 1e-9}),
    "I0": ("i0_w_m2", {}),
    "lambda_laser": ("lambda_laser_m", {"lambda_laser_nm": 1e-9}),
}
_TOP = {"n0", "t_evolve_s", "seed", "gas_diffusion_convention", "d_pos_per_s",
        "sphere", "environment", "trap", "csl", "efield_ref", "cooling"}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario = field(default_factory=Scenario)
    cooling: CavityParams | None = None
    seed: int = 0

    @property
    def digest(self) -> str:
        return config_digest(self)


def _number(path: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{path}: must be finite, got {value!r}")
    return v


def _section(name: str, raw, table: dict, cls, extra=None):
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object, got {type(raw).__name__}")
    known = {}
    for attr, (canon, alts) in table.items():
        known[canon] = (attr, 1.0)
        for k, f in alts.items():
            known[k] = (attr, f)
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"{name}.{key}: unknown key (allowed: {', '.join(sorted(known))})")
        attr, factor = known[key]
        if attr in kwargs:
            raise ConfigError(f"{name}.{key}: {attr} given more than once")
        kwargs[attr] = _number(f"{name}.{key}", value) * factor
    kwargs.update(extra or {})
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    for key in raw:
        if key not in _TOP:
            raise ConfigError(f"{key}: unknown key (allowed: {', '.join(sorted(_TOP))})")
    sphere = _section("sphere", raw.get("sphere", {}), _SPHERE, Sphere)
    env = _section("environment", raw.get("environment", {}), _ENV, Environment)
    trap = _section("trap", raw.get("trap", {}), _TRAP, Trap)
    csl = _section("csl", raw.get("csl", {}), _CSL, CslParams)
    efield = raw.get("efield_ref")
    efield = None if efield is None else _section("efield_ref", efield, _EFIELD, EfieldReference)
    cooling = raw.get("cooling")
    if cooling is not None:
        cooling = _section("cooling", cooling, _COOLING, CavityParams,
                           extra={"omega_s": trap.omega_m})
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed: expected an integer in [0, 2^64), got {seed!r}")
    conv = raw.get("gas_diffusion_convention", "main")
    try:
        scenario = Scenario(
            sphere=sphere, environment=env, trap=trap, csl=csl,
            n0=_number("n0", raw.get("n0", 50.0)),
            t_evolve=_number("t_evolve_s", raw.get("t_evolve_s", 1.0)),
            efield_ref=efield,
            gas_convention=conv,
            D_pos=_number("d_pos_per_s", raw.get("d_pos_per_s", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ScenarioConfig(scenario, cooling, seed)


def loads_config(text: str, source: str = "<string>") -> ScenarioConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(raw)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return loads_config(text, str(path))


def _dump_section(obj, table: dict) -> dict:
    return {canon: float(getattr(obj, attr)) for attr, (canon, _) in table.items()}


def config_to_dict(cfg: ScenarioConfig) -> dict:
    sc = cfg.scenario
    out = {
        "sphere": _dump_section(sc.sphere, _SPHERE),
        "environment": _dump_section(sc.environment, _ENV),
        "trap": _dump_section(sc.trap, _TRAP),
        "csl": _dump_section(sc.csl, _CSL),
        "efield_ref": None if sc.efield_ref is None else _dump_section(sc.efield_ref, _EFIELD),
        "cooling": None if cfg.cooling is None else _dump_section(cfg.cooling, _COOLING),
        "n0": float(sc.n0),
        "t_evolve_s": float(sc.t_evolve),
        "seed": int(cfg.seed),
        "gas_diffusion_convention": sc.gas_convention,
        "d_pos_per_s": float(sc.D_pos),
    }
    return out


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical JSON (SI keys, sorted, shortest round-trip floats)."""
    return json.dumps(config_to_dict(cfg), sort_keys=True, indent=2) + "\n"


def config_digest(cfg: ScenarioConfig) -> str:
    canon = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def with_cooling(cfg: ScenarioConfig) -> ScenarioConfig:
    """Ensure a cooling section exists, defaulting to :class:`CavityParams`."""
    if cfg.cooling is not None:
        return cfg
    return replace(cfg, cooling=CavityParams(omega_s=cfg.scenario.trap.omega_m))
