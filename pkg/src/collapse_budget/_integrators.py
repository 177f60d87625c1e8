"""Compiled Runge-Kutta kernels for affine linear systems ``y' = M y + b``.

Both kernels land exactly on every requested output time and check the
Gaussian-state physicality of the moment vector ``(mQ, mP, vQ, vP, cQP)``
after every accepted step.
"""

import numpy as np
from numba import njit

# Dormand-Prince 5(4) tableau.
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                22 / 525, -1 / 40)

STATUS_OK = 0
STATUS_STEP_UNDERFLOW = 1
STATUS_MAX_STEPS = 2
STATUS_UNPHYSICAL = 3

# Slack on the uncertainty product; round-off on a pure state is ~1e-12.
PHYSICALITY_SLACK = 1e-8


@njit(cache=True)
def _rhs(M, b, y):
    return M @ y + b


@njit(cache=True)
def _physical(y):
    vq, vp, c = y[2], y[3], y[4]
    if vq < 0.0 or vp < 0.0:
        return False, vq * vp - c * c
    prod = vq * vp - c * c
    return prod >= 1.0 - PHYSICALITY_SLACK * max(1.0, vq * vp), prod


@njit(cache=True)
def dopri5_affine(M, b, y0, t_out, rtol, atol, max_steps):
    """Adaptive Dormand-Prince integration sampled at ``t_out``.

    Returns ``(Y, status, n_accepted, n_rejected, min_product)``.
    """
    n = y0.shape[0]
    Y = np.empty((t_out.shape[0], n))
    Y[0] = y0
    y = y0.copy()
    t = t_out[0]
    ok, min_prod = _physical(y)
    k1 = _rhs(M, b, y)

    # Initial step from the local time scale of the solution.
    sc = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((y / sc) ** 2))
    d1 = np.sqrt(np.mean((k1 / sc) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h = 1e-6
    else:
        h = 0.01 * d0 / d1
    span = t_out[-1] - t_out[0]
    if span > 0.0:
        h = min(h, span)

    n_acc = 0
    n_rej = 0
    for j in range(1, t_out.shape[0]):
        t_target = t_out[j]
        while t < t_target:
            if n_acc + n_rej >= max_steps:
                return Y[:j], STATUS_MAX_STEPS, n_acc, n_rej, min_prod
            last = False
            if t + h >= t_target:
                h_try = t_target - t
                last = True
            else:
                h_try = h
            if h_try <= 1e-15 * max(abs(t), 1.0):
                return Y[:j], STATUS_STEP_UNDERFLOW, n_acc, n_rej, min_prod
            k2 = _rhs(M, b, y + h_try * (_A21 * k1))
            k3 = _rhs(M, b, y + h_try * (_A31 * k1 + _A32 * k2))
            k4 = _rhs(M, b, y + h_try * (_A41 * k1 + _A42 * k2 + _A43 * k3))
            k5 = _rhs(M, b, y + h_try * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
            k6 = _rhs(M, b, y + h_try * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4
                                         + _A65 * k5))
            y_new = y + h_try * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
            k7 = _rhs(M, b, y_new)
            err = h_try * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = np.sqrt(np.mean((err / scale) ** 2))
            if err_norm <= 1.0:
                t = t_target if last else t + h_try
                y = y_new
                k1 = k7
                n_acc += 1
                ok, prod = _physical(y)
                if prod < min_prod:
                    min_prod = prod
                if not ok:
                    Y[j] = y
                    return Y[:j + 1], STATUS_UNPHYSICAL, n_acc, n_rej, min_prod
                fac = 10.0 if err_norm == 0.0 else min(10.0, 0.9 * err_norm ** -0.2)
                if not last:
                    h = h_try * fac
            else:
                n_rej += 1
                h = h_try * max(0.2, 0.9 * err_norm ** -0.2)
        Y[j] = y
    return Y, STATUS_OK, n_acc, n_rej, min_prod


@njit(cache=True)
def rk4_affine(M, b, y0, t_out, dt, max_steps):
    """Classical fixed-step RK4; the final step to each output time is shortened."""
    n = y0.shape[0]
    Y = np.empty((t_out.shape[0], n))
    Y[0] = y0
    y = y0.copy()
    t = t_out[0]
    ok, min_prod = _physical(y)
    steps = 0
    for j in range(1, t_out.shape[0]):
        t_target = t_out[j]
        while t < t_target:
            if steps >= max_steps:
                return Y[:j], STATUS_MAX_STEPS, steps, 0, min_prod
            h = min(dt, t_target - t)
            k1 = _rhs(M, b, y)
            k2 = _rhs(M, b, y + 0.5 * h * k1)
            k3 = _rhs(M, b, y + 0.5 * h * k2)
            k4 = _rhs(M, b, y + h * k3)
            y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = t_target if h == t_target - t else t + h
            steps += 1
            ok, prod = _physical(y)
            if prod < min_prod:
                min_prod = prod
            if not ok:
                Y[j] = y
                return Y[:j + 1], STATUS_UNPHYSICAL, steps, 0, min_prod
        Y[j] = y
    return Y, STATUS_OK, steps, 0, min_prod
