"""Command-line front end: ``collapse-budget <subcommand> ...``.

Exit codes: 0 success (including flagged non-converged rows), 1 validation or
computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import re
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (SweepSpec, heating_comparison, immunity_region, likelihood_ratio_test,
                       run_sweep, sweep_to_csv)
from .config import ConfigError, ScenarioConfig, dump_config, load_config, with_cooling
from .constants import MBAR_TO_PA, TWO_PI
from .cooling import run_cooling
from .dynamics import (IntegrationError, MomentState, StepControl, integrate_moments,
                       sample_final_phonons)
from .optimizer import OptimizeSpec, bounds_to_csv, testable_range_curve
from .presets import PRESETS, get_preset
from .scenario import AXES

BUDGET_FIELDS = ("D_gas", "D_bb", "D_csl", "D_efield", "D_pos", "gamma_gas", "gamma_bb_e",
                 "gamma_bb_a", "Gamma_total", "D_diff_total")

_RANGE = re.compile(r"^\s*([^.:\s][^:]*?)\.\.([^:]+):(\d+)(log|lin)?\s*$")


class UsageError(Exception):
    pass


def parse_range(text: str) -> np.ndarray:
    """Parse ``lo..hi:N[log|lin]`` (default log) or a comma-separated list."""
    m = _RANGE.match(text)
    if m:
        lo, hi, n, kind = float(m.group(1)), float(m.group(2)), int(m.group(3)), m.group(4) or "log"
        if n < 1:
            raise UsageError(f"range {text!r}: need at least one point")
        if n == 1:
            return np.array([lo])
        if kind == "lin":
            return np.linspace(lo, hi, n)
        if lo <= 0 or hi <= 0:
            raise UsageError(f"range {text!r}: log ranges need positive endpoints")
        g = np.geomspace(lo, hi, n)
        g[0], g[-1] = lo, hi
        return g
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}; expected lo..hi:N[log|lin] "
                         f"or a comma-separated list") from None


def _pair(text: str) -> tuple:
    vals = parse_range(text if ":" in text else text.replace("..", ","))
    if len(vals) != 2:
        raise UsageError(f"expected an interval lo..hi, got {text!r}")
    return float(vals[0]), float(vals[-1])


def _config(args) -> tuple[ScenarioConfig, str | None]:
    if getattr(args, "config", None) and getattr(args, "preset", None):
        raise UsageError("give either --config or --preset, not both")
    preset = None
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    elif getattr(args, "preset", None):
        preset = args.preset
        try:
            cfg = get_preset(preset).config()
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    else:
        cfg = get_preset("fig2").config()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg, preset


def manifest(cfg: ScenarioConfig, subcommand: str, seed: int) -> dict:
    return {
        "tool": "collapse-budget",
        "version": __version__,
        "config_digest": cfg.digest,
        "subcommand": subcommand,
        "seed": int(seed),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def write_output(path, text: str, cfg: ScenarioConfig, subcommand: str) -> None:
    """Write ``text`` to ``path`` and its run manifest to ``path.manifest.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    man = manifest(cfg, subcommand, cfg.seed)
    Path(str(path) + ".manifest.json").write_text(json.dumps(man, indent=2) + "\n")


def _emit(args, text: str, cfg, subcommand, echo=True):
    if args.out:
        write_output(args.out, text, cfg, subcommand)
    elif echo:
        sys.stdout.write(text)


def cmd_budget(args) -> int:
    cfg, _ = _config(args)
    sc = cfg.scenario
    budgets = [(sc.csl.lambda_csl, sc.budget())]
    if sc.csl.lambda_csl != 0:
        budgets.append((0.0, sc.budget(lambda_csl=0.0)))
    print(f"{'quantity':<14}" + "".join(f"{'lambda=' + format(lam, 'g'):>16}" for lam, _ in budgets))
    for name in BUDGET_FIELDS:
        print(f"{name:<14}" + "".join(f"{getattr(b, name):>16.6g}" for _, b in budgets))
    lines = ["lambda_csl_hz," + ",".join(BUDGET_FIELDS)]
    for lam, b in budgets:
        lines.append(",".join(repr(float(v)) for v in [lam] + [getattr(b, f) for f in BUDGET_FIELDS]))
    if args.out:
        write_output(args.out, "\n".join(lines) + "\n", cfg, "budget")
    return 0


def cmd_evolve(args) -> int:
    cfg, _ = _config(args)
    sc = cfg.scenario
    t_final = sc.t_evolve if args.t_final is None else args.t_final
    if not t_final > 0:
        raise ConfigError("evolution time must be > 0")
    if args.moments:
        control = StepControl(n_out=args.points, fixed_step=args.fixed_step)
        traj, final = integrate_moments(MomentState.thermal(sc.n0), sc.evolution(sc.budget()),
                                        t_final, control)
    else:
        t = np.linspace(0.0, t_final, args.points)
        traj = heating_comparison(sc, [sc.csl.lambda_csl], t)[float(sc.csl.lambda_csl)]
    _emit(args, traj.to_csv(), cfg, "evolve")
    return 0


def cmd_cool(args) -> int:
    cfg, _ = _config(args)
    cfg = with_cooling(cfg)
    res = run_cooling(cfg.cooling, cfg.scenario.sphere, cfg.scenario.environment)
    rows = res.as_dict()
    for k, v in rows.items():
        print(f"{k:<12}{v:>16.6g}")
    text = "quantity,value\n" + "".join(f"{k},{float(v)!r}\n" for k, v in rows.items())
    if args.out:
        write_output(args.out, text, cfg, "cool")
    return 0


def cmd_sweep(args) -> int:
    cfg, preset = _config(args)
    if args.axis or args.range:
        if not (args.axis and args.range):
            raise UsageError("--axis and --range must be given together")
        m = _RANGE.match(args.range)
        if not m:
            raise UsageError("--range must have the form lo..hi:N[log|lin]")
        axis = args.axis
        lo, hi, n = float(m.group(1)), float(m.group(2)), int(m.group(3))
        scale = "linear" if m.group(4) == "lin" else "log"
    elif preset and get_preset(preset).sweep:
        axis, lo, hi, n, scale = get_preset(preset).sweep
    else:
        raise UsageError("sweep needs a fig3 preset or --axis with --range")
    sc = cfg.scenario
    if args.lambda_csl is not None:
        sc = sc.with_axis("lambda_csl", args.lambda_csl)
        cfg = replace(cfg, scenario=sc)
    try:
        spec = SweepSpec(axis, lo, hi, n, scale, sc)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = run_sweep(spec)
    _emit(args, sweep_to_csv(axis, rows), cfg, "sweep")
    if axis in ("pressure", "T_int"):
        region = immunity_region(rows, args.threshold)
        msg = "none" if region is None else f"[{region[0]:.6g}, {region[1]:.6g}] {AXES[axis]}"
        print(f"immunity region (|slope| < {args.threshold:g}): {msg}", file=sys.stderr)
    bad = sum(not r.ok for r in rows)
    if bad:
        print(f"warning: {bad} grid point(s) failed; see NaN rows", file=sys.stderr)
    return 0


def cmd_optimize(args) -> int:
    cfg, preset = _config(args)
    p_spec = get_preset("fig4")
    pressures = (parse_range(args.pressures) if args.pressures else np.array(p_spec.pressures_mbar))
    tints = parse_range(args.tints) if args.tints else np.array(p_spec.tints)
    kw = {}
    if args.r_bounds:
        kw["R_bounds"] = _pair(args.r_bounds)
    if args.f_bounds:
        lo, hi = _pair(args.f_bounds)
        kw["omega_bounds"] = (TWO_PI * lo, TWO_PI * hi)
    if args.lambda_bracket:
        kw["lambda_bracket"] = _pair(args.lambda_bracket)
    try:
        template = OptimizeSpec(pressure=0.0, T_int=0.0, ratio_threshold=args.threshold,
                                horizon=args.horizon, n0=args.n0, base=cfg.scenario, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    bounds = testable_range_curve(pressures * MBAR_TO_PA, tints, template)
    _emit(args, bounds_to_csv(bounds), cfg, "optimize")
    bad = sum(not b.converged for b in bounds)
    if bad:
        print(f"note: {bad} cell(s) not detectable within the lambda bracket", file=sys.stderr)
    return 0


def cmd_discriminate(args) -> int:
    cfg, _ = _config(args)
    sc = cfg.scenario
    mean_h1 = sc.final_phonons(sc.budget())
    mean_h0 = sc.final_phonons(sc.budget(lambda_csl=0.0))
    if args.samples:
        try:
            samples = [int(s) for s in Path(args.samples).read_text().split()]
        except ValueError as exc:
            raise ConfigError(f"{args.samples}: {exc}") from None
    else:
        truth = mean_h1 if args.truth == "csl" else mean_h0
        samples = sample_final_phonons(truth, args.count, cfg.seed)
    rep = likelihood_ratio_test(samples, mean_h0, mean_h1, args.mc_trials, cfg.seed)
    text = ("mean_H0,mean_H1,log_likelihood_ratio,p_value,sample_count,seed\n"
            f"{mean_h0!r},{mean_h1!r},{rep.log_likelihood_ratio!r},{rep.p_value!r},"
            f"{rep.sample_count},{rep.seed}\n")
    _emit(args, text, cfg, "discriminate")
    return 0


def cmd_presets(args) -> int:
    if args.show:
        try:
            sys.stdout.write(dump_config(get_preset(args.show).config()))
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        return 0
    for p in PRESETS.values():
        print(f"{p.name:<8}{p.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="collapse-budget",
                                 description="CSL heating of a Paul-trapped nanosphere.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True

    def common(p, out=True):
        p.add_argument("--config", help="scenario JSON file")
        p.add_argument("--preset", help="named preset (see `presets`)")
        p.add_argument("--seed", type=int, help="override the config seed")
        if out:
            p.add_argument("--out", help="CSV output path (a .manifest.json is written alongside)")

    p = sub.add_parser("budget", help="noise budget of a scenario")
    common(p)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("evolve", help="mean phonon number versus time")
    common(p)
    p.add_argument("--t-final", type=float, help="evolution time in s (default: config)")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--moments", action="store_true", help="integrate the moment equations")
    p.add_argument("--fixed-step", type=float, help="fixed RK4 step in s (with --moments)")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("cool", help="cooling-stage report")
    common(p)
    p.set_defaults(func=cmd_cool)

    p = sub.add_parser("sweep", help="one-parameter sweep with and without CSL")
    common(p)
    p.add_argument("--axis", choices=sorted(AXES))
    p.add_argument("--range", help="lo..hi:N[log|lin] in SI units of the axis")
    p.add_argument("--lambda", dest="lambda_csl", type=float, help="CSL rate in Hz")
    p.add_argument("--threshold", type=float, default=0.1, help="immunity slope threshold")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("optimize", help="smallest testable lambda over a (P, T_int) grid")
    common(p)
    p.add_argument("--pressures", help="pressures in mbar, lo..hi:N[log|lin] or list")
    p.add_argument("--tints", help="internal temperatures in K, range or list")
    p.add_argument("--threshold", type=float, default=1.2)
    p.add_argument("--horizon", type=float, default=100.0)
    p.add_argument("--n0", type=float, default=50.0)
    p.add_argument("--r-bounds", help="radius interval in m, lo..hi")
    p.add_argument("--f-bounds", help="secular frequency interval in Hz, lo..hi")
    p.add_argument("--lambda-bracket", help="lambda search interval in Hz, lo..hi")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("discriminate", help="likelihood-ratio test, CSL vs no CSL")
    common(p)
    p.add_argument("--samples", help="file of observed final phonon numbers")
    p.add_argument("--truth", choices=("csl", "cqm"), default="csl",
                   help="hypothesis for synthetic samples when --samples is absent")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--mc-trials", type=int, default=2000)
    p.set_defaults(func=cmd_discriminate)

    p = sub.add_parser("presets", help="list presets or dump one as JSON")
    p.add_argument("--show", metavar="NAME")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"collapse-budget: error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, IntegrationError, ArithmeticError) as exc:
        print(f"collapse-budget: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
