"""Phonon-number evolution of the trapped oscillator during free evolution.

Quadratures are ``Q = a + a^dag`` and ``P = i(a^dag - a)``, so a thermal state
with mean occupation n has ``var_Q = var_P = 2n + 1`` and the mean phonon number
of any Gaussian state is::

    n = (<Q^2> + <P^2>)/4 - 1/2

Moment equations
----------------
The master equation has a harmonic term at ``omega_m``, double-commutator
diffusion ``D_diff [Q,[Q,rho]] + D_pos [P,[P,rho]]`` and a damping term
``Gamma [Q, {P, rho}]``. The moment equations used here take the damping in its
phase-covariant (rotating-wave, Lindblad-completed) form, i.e. energy damping at
rate ``Gamma`` toward the ground state, and scale the diffusion so that
``D_diff`` is the phonon gain rate. With ``mQ, mP`` the means and ``V`` the
symmetrised covariance matrix::

    d(mQ, mP)/dt = A (mQ, mP),           A = [[-Gamma/2, w], [-w, -Gamma/2]]
    dV/dt       = A V + V A^T + Gamma I + diag(4 D_pos, 4 D_diff)

Summing the diagonal gives ``dn/dt = -Gamma n + D_diff + D_pos`` exactly, for
any state, which is the thermal-state reduction solved by
:func:`phonon_closed_form`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _integrators
from .physics import NoiseBudget


class IntegrationError(RuntimeError):
    """The moment integrator could not complete the requested interval."""


@dataclass(frozen=True)
class EvolutionParams:
    Gamma: float
    D_diff: float
    omega_m: float
    D_pos: float = 0.0

    def __post_init__(self):
        for name in ("Gamma", "D_diff", "D_pos"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        if not (self.omega_m > 0 and math.isfinite(self.omega_m)):
            raise ValueError(f"omega_m must be > 0, got {self.omega_m!r}")

    @classmethod
    def from_budget(cls, budget: NoiseBudget, omega_m: float) -> "EvolutionParams":
        return cls(Gamma=budget.Gamma_total, D_diff=budget.D_diff_total,
                   omega_m=omega_m, D_pos=budget.D_pos)


@dataclass(frozen=True)
class MomentState:
    mean_Q: float
    mean_P: float
    var_Q: float
    var_P: float
    cov_QP: float

    def __post_init__(self):
        if self.var_Q < 0 or self.var_P < 0:
            raise ValueError("variances must be >= 0")
        if self.uncertainty_product < 1.0 - 1e-12:
            raise ValueError(
                f"state violates the uncertainty bound: product {self.uncertainty_product!r} < 1")

    @classmethod
    def thermal(cls, n: float) -> "MomentState":
        if n < 0:
            raise ValueError(f"thermal occupation must be >= 0, got {n!r}")
        v = 2.0 * n + 1.0
        return cls(0.0, 0.0, v, v, 0.0)

    @classmethod
    def from_vector(cls, y) -> "MomentState":
        return cls(*(float(v) for v in y))

    def as_vector(self) -> np.ndarray:
        return np.array([self.mean_Q, self.mean_P, self.var_Q, self.var_P, self.cov_QP])

    @property
    def uncertainty_product(self) -> float:
        return self.var_Q * self.var_P - self.cov_QP**2

    @property
    def phonons(self) -> float:
        return _phonons(self.as_vector())


def _phonons(y):
    y = np.asarray(y)
    return (y[..., 2] + y[..., 3] + y[..., 0] ** 2 + y[..., 1] ** 2) / 4.0 - 0.5


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    mean_n: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        n = np.asarray(self.mean_n, dtype=float)
        if t.shape != n.shape or t.ndim != 1:
            raise ValueError("times and mean_n must be 1-D arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(n < 0):
            raise ValueError("mean_n must be >= 0")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "mean_n", n)

    def to_csv(self) -> str:
        lines = ["t_s,mean_n"]
        lines += [f"{float(t)!r},{float(n)!r}" for t, n in zip(self.times, self.mean_n)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StepControl:
    """Integrator settings; ``fixed_step`` switches to classical RK4."""

    rtol: float = 1e-9
    atol: float = 1e-12
    fixed_step: float | None = None
    n_out: int = 101
    max_steps: int = 50_000_000


def phonon_rate(n: float, params: EvolutionParams) -> float:
    """d<n>/dt = -Gamma n + D_diff."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n!r}")
    return -params.Gamma * n + params.D_diff


def phonon_closed_form(n0, params: EvolutionParams, t):
    """Mean phonon number after time ``t`` for a thermal initial state.

    ``e^{-Gamma t}(n0 - D/Gamma) + D/Gamma``, evaluated as
    ``n0 e^{-x} + D t (1 - e^{-x})/x`` with ``x = Gamma t``, so the Gamma -> 0 limit
    ``n0 + D t`` is reached smoothly. Accepts scalar or array ``t``.
    """
    if n0 < 0:
        raise ValueError(f"n0 must be >= 0, got {n0!r}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be >= 0")
    G, D = params.Gamma, params.D_diff
    x = G * t_arr
    # effective heating time (1 - e^{-x})/G, written so tiny or subnormal G stays exact
    with np.errstate(invalid="ignore", divide="ignore"):
        t_eff = np.where(x > 0, -np.expm1(-x) / np.where(x > 0, x, 1.0), 1.0) * t_arr
    out = n0 * np.exp(-x) + D * t_eff
    return float(out) if out.ndim == 0 else out


def moment_matrix(params: EvolutionParams):
    """Return ``(M, b)`` with ``dy/dt = M y + b`` for ``y = (mQ, mP, vQ, vP, cQP)``."""
    G, w = params.Gamma, params.omega_m
    M = np.array([
        [-G / 2, w, 0.0, 0.0, 0.0],
        [-w, -G / 2, 0.0, 0.0, 0.0],
        [0.0, 0.0, -G, 0.0, 2 * w],
        [0.0, 0.0, 0.0, -G, -2 * w],
        [0.0, 0.0, -w, w, -G],
    ])
    b = np.array([0.0, 0.0, G + 4 * params.D_pos, G + 4 * params.D_diff, 0.0])
    return M, b


def integrate_moments(initial: MomentState, params: EvolutionParams, t_final: float,
                      control: StepControl | None = None):
    """Integrate the first and second moments from 0 to ``t_final``.

    Returns
    -------
    (Trajectory, MomentState)
        Mean phonon number sampled on ``control.n_out`` equally spaced times,
        and the final moment state.

    Raises
    ------
    IntegrationError
        If the step size underflows, the step budget is exhausted or a
        step produces an unphysical covariance.
    """
    control = control or StepControl()
    if not t_final > 0:
        raise ValueError(f"t_final must be > 0, got {t_final!r}")
    M, b = moment_matrix(params)
    t_out = np.linspace(0.0, t_final, max(2, control.n_out))
    y0 = initial.as_vector()
    if control.fixed_step is None:
        Y, status, n_acc, n_rej, min_prod = _integrators.dopri5_affine(
            M, b, y0, t_out, control.rtol, control.atol, control.max_steps)
    else:
        if not control.fixed_step > 0:
            raise ValueError("fixed_step must be > 0")
        Y, status, n_acc, n_rej, min_prod = _integrators.rk4_affine(
            M, b, y0, t_out, control.fixed_step, control.max_steps)
    if status != _integrators.STATUS_OK:
        reason = {
            _integrators.STATUS_STEP_UNDERFLOW: "step size underflow",
            _integrators.STATUS_MAX_STEPS: f"step budget of {control.max_steps} exhausted",
            _integrators.STATUS_UNPHYSICAL: f"unphysical state (uncertainty product {min_prod:.6g})",
        }[status]
        t_reached = t_out[len(Y) - 1]
        raise IntegrationError(f"moment integration failed near t={t_reached:.6g} s: {reason}")
    traj = Trajectory(t_out, np.maximum(_phonons(Y), 0.0))
    return traj, MomentState.from_vector(Y[-1])


def asymptotic_ratio(budget_csl: NoiseBudget, budget_cqm: NoiseBudget) -> float:
    """Heating-rate ratio D_csl_total / D_cqm_total.

    For equal damping in both budgets this is the long-time limit of
    ``n_csl(t) / n_cqm(t)``.
    """
    den = budget_cqm.D_diff_total
    if den <= 0:
        raise ValueError("conventional heating rate must be > 0")
    return budget_csl.D_diff_total / den


def sample_final_phonons(mean_n: float, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` phonon numbers from a Bose-Einstein (geometric) law.

    Uses numpy's PCG64 generator seeded with ``seed``; the sequence is
    reproducible for a given seed and numpy version.
    """
    if not mean_n >= 0:
        raise ValueError(f"mean_n must be >= 0, got {mean_n!r}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return bose_einstein_draws(rng, mean_n, count)


def bose_einstein_draws(rng: np.random.Generator, mean_n: float, size) -> np.ndarray:
    # numpy's geometric counts trials to first success (support 1, 2, ...)
    return rng.geometric(1.0 / (1.0 + mean_n), size=size).astype(np.int64) - 1
