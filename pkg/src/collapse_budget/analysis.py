"""Parameter sweeps and CSL-versus-conventional discrimination."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .dynamics import Trajectory, bose_einstein_draws, phonon_closed_form
from .physics import NoiseBudget
from .scenario import AXES, Scenario

SWEEP_CSV_HEADER = "axis,axis_value,n_csl,n_cqm,ratio,D_gas,D_bb,D_csl,Gamma_total"

# Monte-Carlo trials per deterministic sub-seed; independent of the worker count.
MC_CHUNK = 1000


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    lo: float
    hi: float
    points: int
    scale: str = "log"
    base: Scenario = field(default_factory=Scenario)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}; expected one of {sorted(AXES)}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be 'linear' or 'log', got {self.scale!r}")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got {self.lo!r} >= {self.hi!r}")
        if self.scale == "log" and not self.lo > 0:
            raise ValueError("log scale requires lo > 0")
        if int(self.points) != self.points or self.points < 2:
            raise ValueError(f"points must be an integer >= 2, got {self.points!r}")

    def grid(self) -> np.ndarray:
        if self.scale == "linear":
            return np.linspace(self.lo, self.hi, self.points)
        g = np.geomspace(self.lo, self.hi, self.points)
        g[0], g[-1] = self.lo, self.hi
        return g


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    n_csl: float
    n_cqm: float
    ratio: float
    budget_csl: NoiseBudget | None
    budget_cqm: NoiseBudget | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class DiscriminationReport:
    log_likelihood_ratio: float
    p_value: float
    sample_count: int
    seed: int


def heating_comparison(scenario: Scenario, lambda_values, t_grid) -> dict:
    """Closed-form heating curves ``{lambda: Trajectory}`` on ``t_grid``."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be a nonempty, strictly increasing sequence")
    out = {}
    for lam in lambda_values:
        budget = scenario.budget(lambda_csl=float(lam))
        n = phonon_closed_form(scenario.n0, scenario.evolution(budget), t)
        out[float(lam)] = Trajectory(t, np.atleast_1d(n))
    return out


def evaluate_point(spec: SweepSpec, value: float) -> SweepRow:
    try:
        sc = spec.base.with_axis(spec.axis, float(value))
        b_csl = sc.budget()
        b_cqm = sc.budget(lambda_csl=0.0)
        n_csl = sc.final_phonons(b_csl)
        n_cqm = sc.final_phonons(b_cqm)
    except (ValueError, ArithmeticError) as exc:
        nan = float("nan")
        return SweepRow(float(value), nan, nan, nan, None, None, error=str(exc))
    ratio = n_csl / n_cqm if n_cqm > 0 else float("nan")
    return SweepRow(float(value), n_csl, n_cqm, ratio, b_csl, b_cqm)


def run_sweep(spec: SweepSpec, workers=None) -> list[SweepRow]:
    """Final phonon number with and without CSL at every grid point.

    A failing point yields a row with ``error`` set; the sweep continues.
    """
    grid = spec.grid()
    return ordered_map(lambda v: evaluate_point(spec, v), grid, workers)


def sweep_to_csv(axis: str, rows: list[SweepRow]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        if r.ok:
            b = r.budget_csl
            vals = (r.axis_value, r.n_csl, r.n_cqm, r.ratio, b.D_gas, b.D_bb, b.D_csl,
                    b.Gamma_total)
        else:
            vals = (r.axis_value,) + (float("nan"),) * 7
        lines.append(axis + "," + ",".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def log_log_slopes(x, y) -> np.ndarray:
    """d ln y / d ln x; centred differences inside, one-sided at the ends."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return np.gradient(ly, lx, edge_order=1)


def immunity_region(rows: list[SweepRow], sensitivity_threshold: float = 0.1):
    """Widest contiguous axis interval where ``|d ln n_csl / d ln x| < threshold``.

    Returns ``(lo, hi)`` in axis units, or ``None`` if no grid point qualifies.
    Ties go to the lower end of the axis.
    """
    if len(rows) < 3:
        raise ValueError("need at least 3 rows")
    x = np.array([r.axis_value for r in rows], dtype=float)
    if np.any(np.diff(x) <= 0):
        raise ValueError("rows must be sorted by strictly increasing axis value")
    if np.any(x <= 0):
        raise ValueError("axis values must be > 0 for a log-log slope")
    y = np.array([r.n_csl for r in rows], dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        slopes = log_log_slopes(x, y)
    quiet = np.isfinite(slopes) & (np.abs(slopes) < sensitivity_threshold)

    best = None
    i = 0
    while i < len(quiet):
        if not quiet[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(quiet) and quiet[j + 1]:
            j += 1
        if best is None or (j - i) > (best[1] - best[0]):
            best = (i, j)
        i = j + 1
    if best is None:
        return None
    return float(x[best[0]]), float(x[best[1]])


def _be_logpmf(x: np.ndarray, mean: float) -> np.ndarray:
    if mean == 0.0:
        return np.where(x == 0, 0.0, -np.inf)
    return x * math.log(mean) - (x + 1) * math.log1p(mean)


def _llr(samples: np.ndarray, mean_H0: float, mean_H1: float) -> np.ndarray:
    """Log-likelihood ratio ln L1 - ln L0 along the last axis."""
    with np.errstate(invalid="ignore"):
        d = _be_logpmf(samples, mean_H1) - _be_logpmf(samples, mean_H0)
    d = np.where(np.isnan(d), 0.0, d)
    return d.sum(axis=-1)


def likelihood_ratio_test(samples, mean_H0: float, mean_H1: float, mc_trials: int = 2000,
                          seed: int = 0, workers=None) -> DiscriminationReport:
    """Test H0 (Bose-Einstein, mean ``mean_H0``) against H1 (mean ``mean_H1``).

    The statistic is the log-likelihood ratio ``ln L1 - ln L0``. Its null
    distribution is sampled with ``mc_trials`` synthetic data sets of the same
    size drawn under H0; ties are broken with a uniform variate so the p-value
    is exactly uniform under H0 even when the statistic is degenerate.
    Trials are generated in chunks of fixed size from sub-seeds spawned from
    ``seed``, so the result does not depend on the number of workers.
    """
    x = np.asarray(samples)
    if x.size == 0:
        raise ValueError("samples must be nonempty")
    if x.ndim != 1 or np.any(x < 0) or np.any(x != np.round(x)):
        raise ValueError("samples must be a 1-D sequence of nonnegative integers")
    x = x.astype(np.int64)
    if mean_H0 < 0 or mean_H1 < 0:
        raise ValueError("means must be >= 0")
    if mean_H0 == 0 and mean_H1 == 0 and np.any(x > 0):
        raise ValueError("both hypotheses have zero mean but the samples are not all zero")
    if mc_trials < 1:
        raise ValueError("mc_trials must be >= 1")

    observed = float(_llr(x, mean_H0, mean_H1))
    seq = np.random.SeedSequence(seed)
    tie_seed, *chunk_seeds = seq.spawn(1 + -(-mc_trials // MC_CHUNK))
    sizes = [MC_CHUNK] * (mc_trials // MC_CHUNK)
    if mc_trials % MC_CHUNK:
        sizes.append(mc_trials % MC_CHUNK)

    def chunk(args):
        ss, size = args
        rng = np.random.Generator(np.random.PCG64(ss))
        sims = _llr(bose_einstein_draws(rng, mean_H0, (size, x.size)), mean_H0, mean_H1)
        tol = 1e-9 * (1.0 + abs(observed)) if math.isfinite(observed) else 0.0
        if math.isfinite(observed):
            greater = int(np.sum(sims > observed + tol))
            equal = int(np.sum(np.abs(sims - observed) <= tol))
        else:
            greater = 0
            equal = int(np.sum(sims == observed))
        return greater, equal

    counts = ordered_map(chunk, zip(chunk_seeds, sizes), workers)
    greater = sum(c[0] for c in counts)
    equal = sum(c[1] for c in counts)
    u = np.random.Generator(np.random.PCG64(tie_seed)).random()
    p = (1.0 + greater + u * equal) / (mc_trials + 1.0)
    return DiscriminationReport(observed, min(1.0, p), int(x.size), int(seed))
