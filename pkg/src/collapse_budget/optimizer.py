"""Smallest testable CSL rate for given pressure and internal temperature.

A collapse rate counts as testable when the phonon number after the horizon
with CSL exceeds the CSL-free prediction by ``ratio_threshold``. For each
geometry (radius, trap frequency) the smallest such rate is found by
bisection in log(lambda), which is valid because the ratio is strictly
increasing in lambda. The geometry is chosen by a coarse log grid followed by
a Nelder-Mead refinement in (log R, log omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from ._parallel import ordered_map
from .dynamics import EvolutionParams, phonon_closed_form
from .physics import NoiseBudget
from .scenario import Scenario

OPTIMIZE_CSV_HEADER = ("pressure_Pa,T_int_K,lambda_min_Hz,best_R_m,best_omega_rad_s,"
                       "achieved_ratio,converged")


class MonotonicityError(RuntimeError):
    """The ratio statistic failed the pre-bisection monotonicity probe."""


@dataclass(frozen=True)
class OptimizeSpec:
    pressure: float
    T_int: float
    ratio_threshold: float = 1.2
    horizon: float = 100.0
    n0: float = 50.0
    R_bounds: tuple = (5e-9, 1e-6)
    omega_bounds: tuple = (2 * math.pi * 1e2, 2 * math.pi * 1e6)
    lambda_bracket: tuple = (1e-16, 1e-4)
    base: Scenario = field(default_factory=Scenario)
    grid_points: int = 16
    lambda_rtol: float = 1e-3
    simplex_rtol: float = 1e-3

    def __post_init__(self):
        if not self.ratio_threshold > 1:
            raise ValueError(f"ratio_threshold must be > 1, got {self.ratio_threshold!r}")
        if not (self.pressure >= 0 and self.T_int >= 0):
            raise ValueError("pressure and T_int must be >= 0")
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if not self.n0 >= 0:
            raise ValueError("n0 must be >= 0")
        for name in ("R_bounds", "omega_bounds", "lambda_bracket"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi and math.isfinite(hi)):
                raise ValueError(f"{name} must be a positive interval, got {(lo, hi)!r}")
        if self.grid_points < 1:
            raise ValueError("grid_points must be >= 1")

    def scenario(self, R: float | None = None, omega: float | None = None) -> Scenario:
        """The base scenario at this spec's conditions and an optional geometry."""
        base = self.base
        env = replace(base.environment, pressure=self.pressure, T_int=self.T_int)
        sc = replace(base, environment=env, n0=self.n0, t_evolve=self.horizon)
        if R is not None:
            sc = sc.with_axis("radius", R)
        if omega is not None:
            sc = sc.with_axis("omega_m", omega)
        return sc


@dataclass(frozen=True)
class LambdaSearch:
    lambda_min: float
    achieved_ratio: float
    converged: bool


@dataclass(frozen=True)
class TestableBound:
    lambda_min: float
    best_R: float
    best_omega: float
    achieved_ratio: float
    converged: bool
    pressure: float = float("nan")
    T_int: float = float("nan")

    __test__ = False  # not a pytest class

    def csv_row(self) -> str:
        vals = (self.pressure, self.T_int, self.lambda_min, self.best_R, self.best_omega,
                self.achieved_ratio)
        return ",".join(repr(float(v)) for v in vals) + "," + ("true" if self.converged else "false")


class _RatioModel:
    """Ratio statistic at one geometry with the lambda-independent work cached."""

    def __init__(self, config: Scenario):
        self.config = config
        b0 = config.budget(lambda_csl=0.0)
        b1 = config.budget(lambda_csl=1.0)
        self.budget0: NoiseBudget = b0
        self.d_csl_unit = b1.D_csl
        self.params0 = config.evolution(b0)
        self.n_cqm = phonon_closed_form(config.n0, self.params0, config.t_evolve)

    def __call__(self, lam: float) -> float:
        p = EvolutionParams(self.params0.Gamma, self.params0.D_diff + lam * self.d_csl_unit,
                            self.params0.omega_m, self.params0.D_pos)
        return phonon_closed_form(self.config.n0, p, self.config.t_evolve) / self.n_cqm


def ratio_statistic(config: Scenario, lam: float) -> float:
    """n(t) with CSL rate ``lam`` over n(t) without CSL, at ``config.t_evolve``."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    b_l = config.budget(lambda_csl=lam)
    b_0 = config.budget(lambda_csl=0.0)
    return config.final_phonons(b_l) / config.final_phonons(b_0)


def _probe_monotone(ratio, lo: float, hi: float) -> None:
    mid = math.sqrt(lo * hi)
    r_lo, r_mid, r_hi = ratio(lo), ratio(mid), ratio(hi)
    if not (r_lo <= r_mid <= r_hi and r_lo < r_hi):
        raise MonotonicityError(
            f"ratio not increasing in lambda: r({lo:g})={r_lo!r}, r({mid:g})={r_mid!r}, "
            f"r({hi:g})={r_hi!r}")


def bisect_threshold(ratio, threshold: float, bracket, rtol: float = 1e-3) -> LambdaSearch:
    """Smallest lambda in ``bracket`` with ``ratio(lambda) >= threshold``.

    Bisects geometrically until ``hi/lo <= 1 + rtol`` and returns the upper
    end, which always satisfies the threshold. If the bracket top does not
    reach the threshold the result is flagged as not converged.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    r_hi = ratio(hi)
    if not r_hi >= threshold:
        return LambdaSearch(hi, r_hi, False)
    r_lo = ratio(lo)
    if r_lo >= threshold:
        return LambdaSearch(lo, r_lo, True)
    while hi / lo > 1.0 + rtol:
        mid = math.sqrt(lo * hi)
        r_mid = ratio(mid)
        if r_mid >= threshold:
            hi, r_hi = mid, r_mid
        else:
            lo = mid
    return LambdaSearch(hi, r_hi, True)


def min_lambda_at_geometry(config: Scenario, spec: OptimizeSpec) -> LambdaSearch:
    """Bisection for the smallest detectable lambda at the geometry in ``config``."""
    model = _RatioModel(config)
    _probe_monotone(model, *spec.lambda_bracket)
    return bisect_threshold(model, spec.ratio_threshold, spec.lambda_bracket, spec.lambda_rtol)


def _objective(spec: OptimizeSpec, log_r: float, log_w: float) -> LambdaSearch:
    sc = spec.scenario(R=math.exp(log_r), omega=math.exp(log_w))
    return min_lambda_at_geometry(sc, spec)


def min_testable_lambda(spec: OptimizeSpec) -> TestableBound:
    """Optimise radius and trap frequency for the smallest testable lambda."""
    lr = np.log(spec.R_bounds)
    lw = np.log(spec.omega_bounds)
    gr = np.linspace(lr[0], lr[1], spec.grid_points)
    gw = np.linspace(lw[0], lw[1], spec.grid_points)

    best = None          # (lambda, log_r, log_w, search)
    fallback = None      # highest ratio at the bracket top when nothing converges
    for a in gr:
        for b in gw:
            res = _objective(spec, a, b)
            if res.converged:
                if best is None or res.lambda_min < best[0]:
                    best = (res.lambda_min, a, b, res)
            elif fallback is None or res.achieved_ratio > fallback[0]:
                fallback = (res.achieved_ratio, a, b, res)

    if best is None:
        _, a, b, res = fallback
        return TestableBound(res.lambda_min, math.exp(a), math.exp(b), res.achieved_ratio,
                             False, spec.pressure, spec.T_int)

    bounds = [tuple(lr), tuple(lw)]
    cache = {}

    def f(z):
        key = (float(z[0]), float(z[1]))
        if key not in cache:
            a = min(max(key[0], lr[0]), lr[1])
            b = min(max(key[1], lw[0]), lw[1])
            cache[key] = (_objective(spec, a, b), a, b)
        res = cache[key][0]
        return math.log(res.lambda_min) if res.converged else math.inf

    x0 = np.array([best[1], best[2]])
    step = np.array([(lr[1] - lr[0]) / max(spec.grid_points - 1, 1),
                     (lw[1] - lw[0]) / max(spec.grid_points - 1, 1)])
    simplex = np.array([x0, x0 + [step[0], 0.0], x0 + [0.0, step[1]]])
    simplex = np.clip(simplex, [lr[0], lw[0]], [lr[1], lw[1]])
    if np.allclose(simplex[1], simplex[0]):
        simplex[1] = np.clip(x0 - [step[0], 0.0], [lr[0], lw[0]], [lr[1], lw[1]])
    if np.allclose(simplex[2], simplex[0]):
        simplex[2] = np.clip(x0 - [0.0, step[1]], [lr[0], lw[0]], [lr[1], lw[1]])
    opt = optimize.minimize(
        f, x0, method="Nelder-Mead", bounds=bounds,
        options={"initial_simplex": simplex, "xatol": spec.simplex_rtol,
                 "fatol": spec.lambda_rtol / 10, "maxiter": 400})

    res_nm, a_nm, b_nm = cache.get((float(opt.x[0]), float(opt.x[1])), (None, None, None))
    if res_nm is None:
        f(opt.x)
        res_nm, a_nm, b_nm = cache[(float(opt.x[0]), float(opt.x[1]))]
    if res_nm.converged and res_nm.lambda_min < best[0]:
        best = (res_nm.lambda_min, a_nm, b_nm, res_nm)
    _, a, b, res = best
    return TestableBound(res.lambda_min, math.exp(a), math.exp(b), res.achieved_ratio, True,
                         spec.pressure, spec.T_int)


def testable_range_curve(pressures, T_int_values, template: OptimizeSpec,
                         workers=None) -> list[TestableBound]:
    """One :class:`TestableBound` per (T_int, pressure) cell, T_int-major grid order."""
    pressures = list(pressures)
    T_int_values = list(T_int_values)
    if not pressures or not T_int_values:
        raise ValueError("pressure and temperature grids must be nonempty")
    cells = [(p, T) for T in T_int_values for p in pressures]
    return ordered_map(lambda c: min_testable_lambda(replace(template, pressure=c[0], T_int=c[1])),
                       cells, workers)


def bounds_to_csv(bounds: list[TestableBound]) -> str:
    return OPTIMIZE_CSV_HEADER + "\n" + "".join(b.csv_row() + "\n" for b in bounds)
