import math
import warnings
from dataclasses import replace

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from collapse_budget.cooling import (
    MAX_ALIGNMENT_OFFSET, CavityParams, bessel_j0, cooling_rate, cooling_transient,
    initial_phonons, optomech_coupling, run_cooling, steady_state_phonons)
from collapse_budget.physics import Environment, Sphere

CAV = CavityParams()


def test_bessel_examples():
    assert bessel_j0(0.0) == 1.0
    zero = float(mp.besseljzero(0, 1))
    assert zero == pytest.approx(2.404825557695773, rel=1e-15)
    assert abs(bessel_j0(zero)) < 1e-10


@pytest.mark.parametrize("x", np.linspace(-50, 50, 201))
def test_bessel_against_mpmath(x):
    assert abs(bessel_j0(float(x)) - float(mp.besselj(0, float(x)))) < 1e-12


def test_bessel_even_symmetry():
    rng = np.random.default_rng(4)
    for x in rng.uniform(0, 50, 500):
        assert abs(bessel_j0(x) - bessel_j0(-x)) <= 1e-14


def test_coupling_zero_cases():
    s = Sphere()
    assert optomech_coupling(replace(CAV, X_d=0.0), s) == 0.0
    assert optomech_coupling(replace(CAV, a_c_sq=0.0), s) == 0.0
    assert optomech_coupling(CAV, s) > 0


def test_coupling_scales_with_photon_number():
    s = Sphere()
    assert optomech_coupling(replace(CAV, a_c_sq=2e8), s) == pytest.approx(
        2 * optomech_coupling(CAV, s), rel=1e-14)


def test_cooling_rate_signs():
    g = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert cooling_rate(g, replace(CAV, Delta=0.0)) == 0.0
        red = cooling_rate(g, replace(CAV, Delta=-CAV.omega_c))
        blue = cooling_rate(g, replace(CAV, Delta=CAV.omega_c))
    assert red > 0
    assert blue == pytest.approx(-red, rel=1e-14)


def test_cooling_rate_warns_when_not_red():
    with pytest.warns(UserWarning, match="red-detuned"):
        cooling_rate(1.0, replace(CAV, Delta=1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cooling_rate(1.0, CAV)
    with pytest.raises(ValueError):
        cooling_rate(-1.0, CAV)


def test_steady_state_examples():
    lossless = replace(CAV, kappa_sc=0.0, Gamma_sc=0.0, Gamma_others=0.0)
    assert steady_state_phonons(lossless, 1.0) == pytest.approx((CAV.kappa / (4 * CAV.omega_c)) ** 2)
    unit = replace(lossless, kappa=4 * CAV.omega_c)
    assert steady_state_phonons(unit, 123.0) == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        steady_state_phonons(CAV, 0.0)


@settings(max_examples=100, deadline=None)
@given(ksc=st.floats(0, 1e7), gsc=st.floats(0, 1e6), go=st.floats(0, 1e6), gm=st.floats(1e-3, 1e8))
def test_steady_state_floor(ksc, gsc, go, gm):
    cav = replace(CAV, kappa_sc=ksc, Gamma_sc=gsc, Gamma_others=go)
    assert steady_state_phonons(cav, gm) >= ((cav.kappa + ksc) / (4 * cav.omega_c)) ** 2


def test_transient_examples():
    assert cooling_transient(1e6, 2.0, 5.0, 0.0) == 1e6
    assert cooling_transient(1e6, 2.0, 5.0, 1e3) == pytest.approx(2.0, rel=1e-15)
    assert cooling_transient(1e6, 2.0, 5.0, math.log(2) / 5.0) == pytest.approx((1e6 + 2) / 2, rel=1e-14)
    with pytest.raises(ValueError):
        cooling_transient(1.0, 1.0, 1.0, -1.0)


@settings(max_examples=100, deadline=None)
@given(nt=st.floats(1, 1e8), frac=st.floats(0, 0.99), gm=st.floats(1e-3, 1e4),
       t=st.floats(0, 10), dt=st.floats(0, 10))
def test_transient_monotone(nt, frac, gm, t, dt):
    ns = frac * nt
    assert cooling_transient(nt, ns, gm, t + dt) <= cooling_transient(nt, ns, gm, t) * (1 + 1e-14)


def test_initial_phonons_examples():
    s = Sphere()
    same = replace(CAV, omega_c=CAV.omega_s)
    assert initial_phonons(0.3, same, s) == pytest.approx(0.3, rel=1e-15)
    ten = replace(CAV, omega_c=10 * CAV.omega_s)
    assert initial_phonons(0.3, ten, s) == pytest.approx(3.0, rel=1e-14)
    off = replace(CAV, delta_x=0.2e-9)
    kick = initial_phonons(0.0, off, s)
    assert kick > 0
    assert initial_phonons(0.7, off, s) - initial_phonons(0.7, CAV, s) == pytest.approx(kick, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(n=st.floats(0, 1e3), a=st.floats(0, MAX_ALIGNMENT_OFFSET), b=st.floats(0, MAX_ALIGNMENT_OFFSET))
def test_initial_phonons_monotone_in_offset(n, a, b):
    lo, hi = sorted((a, b))
    s = Sphere()
    assert initial_phonons(n, replace(CAV, delta_x=hi), s) >= initial_phonons(n, replace(CAV, delta_x=lo), s)


def test_initial_phonons_linear_in_nss():
    s = Sphere()
    assert initial_phonons(4.0, CAV, s) == pytest.approx(2 * initial_phonons(2.0, CAV, s), rel=1e-15)


def test_alignment_warning():
    with pytest.warns(UserWarning, match="offset"):
        initial_phonons(0.1, replace(CAV, delta_x=1e-9), Sphere())


def test_run_cooling_defaults():
    res = run_cooling(CAV, Sphere(), Environment())
    assert res.Gamma_minus > 0
    assert res.N_ss < 1
    assert res.n0 == pytest.approx(res.N_ss * CAV.omega_c / CAV.omega_s)
    assert res.T_bulk > Environment().T_env
    assert set(res.as_dict()) == {"g_sq", "Gamma_minus", "N_ss", "T_bulk", "n0"}


def test_cavity_validation():
    with pytest.raises(ValueError):
        CavityParams(kappa=0.0)
    with pytest.raises(ValueError):
        CavityParams(Gamma_sc=-1.0)
