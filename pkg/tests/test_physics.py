import math
from dataclasses import replace

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from collapse_budget import constants as C
from collapse_budget.physics import (
    ALPHA_SERIES_THRESHOLD, BB_RESPONSE_IM_CALIBRATED, H2_MASS, CslParams, EfieldReference,
    Environment, NoiseBudget, Sphere, Trap, alpha_sphere, assemble_budget, bb_damping,
    bb_diffusion, bulk_temperature, calibrate_bb_response, csl_diffusion,
    efield_heating_translate, gas_damping, gas_diffusion, mean_gas_speed, sphere_mass,
    _alpha_bracket_scaled)

mp.mp.dps = 50
W_FIG2 = 2 * math.pi * 5e3


def mp_bracket(x):
    """Reference 6/x^3 [e^-x - 1 + x/2 (e^-x + 1)] at 50 digits."""
    x = mp.mpf(x)
    return 6 * (mp.exp(-x) - 1 + x / 2 * (mp.exp(-x) + 1)) / x**3


def mp_mass(R, d):
    return mp.mpf(4) / 3 * mp.pi * mp.mpf(R) ** 3 * mp.mpf(d)


# --- types -----------------------------------------------------------------

@pytest.mark.parametrize("kw", [
    {"radius": 0.0}, {"radius": -1e-9}, {"density": 0.0}, {"eps2": -1e-3},
    {"bb_response_im": -1.0}, {"emissivity": 1.5}, {"emissivity": -0.1},
    {"radius": float("nan")},
])
def test_sphere_rejects_invalid(kw):
    with pytest.raises(ValueError):
        Sphere(**kw)


@pytest.mark.parametrize("cls,kw", [
    (Environment, {"T_env": -1.0}), (Environment, {"pressure": -1e-10}),
    (Environment, {"gas_mass": 0.0}), (Environment, {"T_int": -3.0}),
    (Trap, {"omega_m": 0.0}), (CslParams, {"lambda_csl": -1e-8}), (CslParams, {"r_c": 0.0}),
])
def test_other_types_reject_invalid(cls, kw):
    with pytest.raises(ValueError):
        cls(**kw)


def test_constants_are_positive_codata():
    for name in ("hbar", "k_B", "c", "sigma_SB", "m_amu"):
        assert getattr(C.CONSTANTS, name) > 0
    assert C.HBAR == pytest.approx(1.054571817e-34, rel=1e-9)
    assert C.M_AMU == pytest.approx(1.66053906e-27, rel=1e-8)
    with pytest.raises(Exception):
        C.CONSTANTS.hbar = 1.0


# --- sphere_mass -------------------------------------------------------------

def test_sphere_mass_oracle():
    got = sphere_mass(Sphere(radius=1e-7, density=2300.0))
    assert_allclose(got, float(mp_mass("1e-7", 2300)), rtol=1e-14)
    assert got == pytest.approx(9.634e-18, rel=1e-4)


def test_sphere_mass_unity():
    assert sphere_mass(Sphere(radius=1.0, density=3 / (4 * math.pi))) == pytest.approx(1.0, rel=1e-15)


def test_sphere_mass_rejects_zero_density():
    with pytest.raises(ValueError):
        sphere_mass(Sphere(density=0.0))


# --- alpha -------------------------------------------------------------------

def test_alpha_small_sphere_limit():
    R, rc = 1e-10, 1e-7
    m = 1e-20
    ratio = alpha_sphere(R, rc, m) / (m / C.M_AMU) ** 2
    assert abs(ratio - 0.5) / 0.5 < 1e-6


def test_alpha_at_r_equals_rc():
    m = 1e-18
    ratio = alpha_sphere(1e-7, 1e-7, m) / (m / C.M_AMU) ** 2
    assert_allclose(ratio, float(mp_bracket(1)), rtol=1e-13)
    assert ratio == pytest.approx(0.31091, abs=1e-5)


def test_alpha_large_sphere_limit():
    R, rc, m = 1e-5, 1e-7, 1e-14
    scaled = alpha_sphere(R, rc, m) * R**4 / (rc**4 * (m / C.M_AMU) ** 2)
    assert abs(scaled - 3) / 3 < 1e-3


@pytest.mark.parametrize("x", np.geomspace(ALPHA_SERIES_THRESHOLD / 3, ALPHA_SERIES_THRESHOLD * 3, 41))
def test_alpha_branches_agree_near_switch(x):
    ref = float(mp_bracket(x))
    assert abs(_alpha_bracket_scaled(float(x)) - ref) / ref < 1e-9


def test_alpha_series_and_direct_continuity():
    lo = np.nextafter(ALPHA_SERIES_THRESHOLD, 0)
    a, b = _alpha_bracket_scaled(lo), _alpha_bracket_scaled(ALPHA_SERIES_THRESHOLD)
    assert abs(a - b) / b < 1e-9


@pytest.mark.parametrize("x", [1e-12, 1e-8, 1e-4, 0.5, 2.0, 30.0, 1e4])
def test_alpha_bracket_against_mpmath(x):
    assert_allclose(_alpha_bracket_scaled(x), float(mp_bracket(x)), rtol=1e-10)


def test_alpha_rejects_nonpositive():
    with pytest.raises(ValueError):
        alpha_sphere(0.0, 1e-7, 1e-18)
    with pytest.raises(ValueError):
        alpha_sphere(1e-7, 1e-7, 0.0)


# --- CSL diffusion -------------------------------------------------------------

def test_csl_diffusion_fig2_oracle():
    s, tr, csl = Sphere(), Trap(W_FIG2), CslParams(1e-8, 1e-7)
    m = mp_mass(s.radius, s.density)
    ref = (mp.mpf(C.HBAR) / (m * mp.mpf(W_FIG2)) * mp.mpf("1e-8") / mp.mpf("1e-7") ** 2
           * (m / mp.mpf(C.M_AMU)) ** 2 * mp_bracket(1))
    got = csl_diffusion(s, tr, csl)
    assert_allclose(got, float(ref), rtol=1e-12)
    assert 1e3 <= got < 1e4
    assert got == pytest.approx(3.6e3, rel=0.05)


def test_csl_diffusion_zero_and_linear():
    s, tr = Sphere(), Trap()
    assert csl_diffusion(s, tr, CslParams(0.0)) == 0.0
    one = csl_diffusion(s, tr, CslParams(1e-8))
    assert csl_diffusion(s, tr, CslParams(2e-8)) == pytest.approx(2 * one, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(lam=st.one_of(st.just(0.0), st.floats(1e-20, 1e-2)), R=st.floats(1e-9, 1e-5), w=st.floats(1e2, 1e7))
def test_csl_linearity_property(lam, R, w):
    s, tr = Sphere(radius=R), Trap(w)
    unit = csl_diffusion(s, tr, CslParams(1.0))
    assert csl_diffusion(s, tr, CslParams(lam)) == pytest.approx(lam * unit, rel=1e-12, abs=0)


def test_csl_diffusion_decays_like_inverse_radius_for_large_spheres():
    tr, csl = Trap(), CslParams(1e-8, 1e-7)
    d1 = csl_diffusion(Sphere(radius=1e-4), tr, csl)
    d2 = csl_diffusion(Sphere(radius=2e-4), tr, csl)
    assert d1 / d2 == pytest.approx(2.0, rel=1e-3)


# --- gas ------------------------------------------------------------------------

def test_mean_gas_speed():
    assert mean_gas_speed(0.0, H2_MASS) == 0.0
    ref = mp.sqrt(8 * mp.mpf(C.K_B) * 300 / (mp.pi * mp.mpf("3.3476e-27")))
    got = mean_gas_speed(300.0, 3.3476e-27)
    assert_allclose(got, float(ref), rtol=1e-14)
    assert got == pytest.approx(1.78e3, rel=0.01)
    assert mean_gas_speed(1200.0, H2_MASS) == pytest.approx(2 * mean_gas_speed(300.0, H2_MASS))
    with pytest.raises(ValueError):
        mean_gas_speed(300.0, 0.0)


def test_gas_damping():
    s = Sphere()
    assert gas_damping(Environment(pressure=0.0), s) == 0.0
    env = Environment(pressure=1e-10, T_env=4.0)
    v = mp.sqrt(8 * mp.mpf(C.K_B) * 4 / (mp.pi * mp.mpf(H2_MASS)))
    ref = 16 * mp.mpf("1e-10") / (mp.pi * v * mp.mpf("1e-7") * 2300)
    got = gas_damping(env, s)
    assert_allclose(got, float(ref), rtol=1e-13)
    assert got == pytest.approx(1.1e-8, rel=0.05)
    assert gas_damping(replace(env, pressure=2e-10), s) == pytest.approx(2 * got, rel=1e-14)


def test_gas_damping_needs_temperature_with_gas():
    with pytest.raises(ValueError):
        gas_damping(Environment(T_env=0.0, pressure=1e-10), Sphere())


def test_gas_diffusion():
    env, tr = Environment(T_env=4.0), Trap(W_FIG2)
    assert gas_diffusion(0.0, env, tr) == 0.0
    assert gas_diffusion(1e-8, replace(env, T_env=0.0), tr) == 0.0
    ref = mp.mpf("1e-8") * mp.mpf(C.K_B) * 4 / (2 * mp.mpf(C.HBAR) * mp.mpf(W_FIG2))
    got = gas_diffusion(1e-8, env, tr)
    assert_allclose(got, float(ref), rtol=1e-13)
    assert got == pytest.approx(0.08, rel=0.1)
    assert gas_diffusion(1e-8, env, tr, convention="si") == pytest.approx(2 * got)
    with pytest.raises(ValueError):
        gas_diffusion(1e-8, env, tr, convention="other")


# --- blackbody -----------------------------------------------------------------

def test_bb_damping_scaling():
    s, tr = Sphere(), Trap()
    assert bb_damping(0.0, s, tr) == 0.0
    assert bb_damping(130.0, s, tr) / bb_damping(65.0, s, tr) == pytest.approx(64.0, rel=1e-13)
    assert bb_damping(65.0, s, tr) / bb_damping(4.0, s, tr) == pytest.approx((65 / 4) ** 6, rel=1e-13)
    assert (65 / 4) ** 6 == pytest.approx(1.86e7, rel=0.02)


@settings(max_examples=50, deadline=None)
@given(T=st.floats(1e-2, 1e4))
def test_bb_sixth_power_property(T):
    s, tr = Sphere(), Trap()
    assert bb_damping(2 * T, s, tr) / bb_damping(T, s, tr) == pytest.approx(64.0, rel=1e-12)


def test_bb_damping_as_printed():
    s, tr = Sphere(), Trap(W_FIG2)
    ref = (2 * mp.pi**4 / 63 * (mp.mpf(C.K_B) * 65) ** 6
           / (mp.mpf(C.C_LIGHT) ** 5 * mp.mpf(C.HBAR) * 2300 * mp.mpf(W_FIG2))
           * mp.mpf(BB_RESPONSE_IM_CALIBRATED))
    assert_allclose(bb_damping(65.0, s, tr), float(ref), rtol=1e-12)


def test_bb_diffusion():
    env, tr = Environment(), Trap()
    assert bb_diffusion(0.0, 0.0, env, tr) == 0.0
    emit_only = bb_diffusion(1e-6, 0.0, env, tr)
    assert emit_only == pytest.approx(C.K_B * 1e-6 * env.T_int / (2 * C.HBAR * tr.omega_m))
    assert bb_diffusion(1e-6, 1e-7, env, tr) == pytest.approx(
        emit_only + bb_diffusion(0.0, 1e-7, env, tr), rel=1e-14)


def test_bb_calibration_reproduces_baseline():
    env, tr, s = Environment(), Trap(W_FIG2), Sphere()
    d = bb_diffusion(bb_damping(env.T_int, s, tr), bb_damping(env.T_env, s, tr), env, tr)
    assert d == pytest.approx(350.0, rel=1e-3)
    assert calibrate_bb_response() == pytest.approx(BB_RESPONSE_IM_CALIBRATED, rel=1e-3)


# --- electric field -------------------------------------------------------------

def test_efield_identity():
    s, tr = Sphere(), Trap()
    assert efield_heating_translate(7.0, s.charge, s.mass, tr.omega_m, s, tr) == pytest.approx(7.0)


def test_efield_translation_of_ion_rate():
    # ~10 phonons/s for a singly charged ion at ~MHz -> ~1e-4 for the sphere
    s, tr, ref = Sphere(), Trap(W_FIG2), EfieldReference()
    got = efield_heating_translate(ref.rate, ref.charge, ref.mass, ref.omega, s, tr)
    assert abs(math.log10(got / 1e-4)) <= 1.0


def test_efield_charge_scaling_and_errors():
    s, tr = Sphere(), Trap()
    base = efield_heating_translate(10, C.E_CHARGE, 1e-25, 1e7, s, tr)
    s2 = replace(s, charge=2 * s.charge)
    assert efield_heating_translate(10, C.E_CHARGE, 1e-25, 1e7, s2, tr) == pytest.approx(4 * base)
    for args in [(10, 0.0, 1e-25, 1e7), (10, C.E_CHARGE, 0.0, 1e7), (10, C.E_CHARGE, 1e-25, 0.0)]:
        with pytest.raises(ValueError):
            efield_heating_translate(*args, s, tr)


# --- bulk temperature ----------------------------------------------------------

def test_bulk_temperature():
    s, env = Sphere(eps2=1e-7), Environment(T_env=4.0)
    assert bulk_temperature(0.0, 1064e-9, s, env) == 4.0
    assert bulk_temperature(1e9, 1064e-9, replace(s, eps2=0.0), env) == 4.0
    assert bulk_temperature(1e9, 1064e-9, s, env) > 4.0
    with pytest.raises(ValueError):
        bulk_temperature(1e9, 1064e-9, replace(s, emissivity=0.0), env)


def test_bulk_temperature_formula():
    s, env = Sphere(eps1=2.1, eps2=1e-6, emissivity=0.5), Environment(T_env=10.0)
    I0, lam = 1e8, 1.55e-6
    add = I0 * 4 * math.pi**3 * s.radius / (0.5 * C.SIGMA_SB * lam) * 3e-6 / (4.1**2 + 1e-12)
    assert bulk_temperature(I0, lam, s, env) == pytest.approx((add + 1e4) ** 0.25, rel=1e-13)


# --- budget ------------------------------------------------------------------------

def test_all_zero_budget():
    b = assemble_budget(Sphere(), Environment(T_env=0.0, pressure=0.0, T_int=0.0), Trap(),
                        CslParams(0.0))
    assert all(v == 0.0 for v in b.as_dict().values())


def test_fig2_budget_composition():
    b = assemble_budget(Sphere(), Environment(), Trap(W_FIG2), CslParams(1e-8))
    assert b.D_gas / b.D_diff_total < 0.01
    assert b.D_diff_total == pytest.approx(b.D_bb + b.D_csl, rel=0.01)
    assert b.D_efield == 0.0


def test_budget_source_independence():
    args = (Sphere(), Environment(), Trap())
    b1 = assemble_budget(*args, CslParams(1e-8)).as_dict()
    b0 = assemble_budget(*args, CslParams(0.0)).as_dict()
    diff = {k for k in b1 if b1[k] != b0[k]}
    assert diff == {"D_csl", "D_diff_total"}


def test_budget_with_efield_reference():
    b = assemble_budget(Sphere(), Environment(), Trap(), CslParams(), EfieldReference())
    assert b.D_efield > 0


def test_budget_rejects_negative_rate():
    with pytest.raises(ValueError):
        NoiseBudget(-1.0, 0, 0, 0, 0, 0, 0)


@settings(max_examples=200, deadline=None)
@given(
    R=st.floats(1e-9, 1e-5), d=st.floats(100, 2e4), P=st.floats(0, 1e-3),
    T_env=st.floats(0.1, 400), T_int=st.floats(0, 1000), w=st.floats(10, 1e8),
    lam=st.floats(0, 1e-3), rc=st.floats(1e-8, 1e-6),
)
def test_budget_additivity_and_nonnegativity(R, d, P, T_env, T_int, w, lam, rc):
    b = assemble_budget(Sphere(radius=R, density=d), Environment(T_env, P, H2_MASS, T_int),
                        Trap(w), CslParams(lam, rc))
    assert b.D_diff_total == b.D_gas + b.D_bb + b.D_csl + b.D_efield
    assert b.Gamma_total == (b.gamma_gas + b.gamma_bb_e + b.gamma_bb_a) / 4
    assert all(v >= 0 for v in b.as_dict().values())
