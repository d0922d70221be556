"""Command line entry point: ``spherepoly <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from ._io import csv_text, dumps17
from .errors import SpherePolyError
from .harness import (
    ExperimentConfig,
    Mode,
    compare_to_theory,
    fit_rate,
    parse_N_spec,
    run_experiment,
    write_report,
)
from .sampling import density_from_config
from .theory import lp_deficit_constant, theory_constants

DEFAULT_N_GRID = "128:2048:geometric"

# flag name -> ExperimentConfig key
_FLAG_KEYS = {
    "n": "n", "N": "N_grid", "a": "a", "b": "b", "p": "p", "density": "density",
    "reps": "replicates", "seed": "master_seed", "mode": "mode", "dist_mode": "distance_mode",
    "signed": "signed", "target_rel_se": "target_rel_se", "max_reps": "max_replicates",
}


def _common(sp, mode_default=None):
    sp.add_argument("--config", help="JSON file with ExperimentConfig keys; flags override it")
    sp.add_argument("--n", type=int, help="ambient dimension")
    sp.add_argument("--N", action="append",
                    help="point count; repeatable, comma lists or lo:hi:geometric[:factor]")
    sp.add_argument("--a", type=float)
    sp.add_argument("--b", type=float)
    sp.add_argument("--p", type=float)
    sp.add_argument("--density", help="family name, JSON object or path to a JSON file")
    sp.add_argument("--reps", type=int, help="replicates per N")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=[m.value for m in Mode], default=mode_default)
    sp.add_argument("--dist-mode", dest="dist_mode", choices=["min_over_face", "affine_hyperplane"])
    sp.add_argument("--signed", action="store_true", default=None)
    sp.add_argument("--target-rel-se", dest="target_rel_se", type=float)
    sp.add_argument("--max-reps", dest="max_reps", type=int)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", help="directory for report.json, points.csv, ratefit.json")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--quad-samples", dest="quad_samples", type=int, default=10**6,
                    help="MC samples for non-uniform theory constants")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spherepoly", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("estimate", help="estimate E[T_{a,b}] per N"), Mode.TFUNC.value)
    _common(sub.add_parser("deficit", help="estimate the L_p surface area deficit per N"),
            Mode.LP_DEFICIT.value)
    _common(sub.add_parser("containment", help="frequency of hulls missing the origin"),
            Mode.CONTAINMENT.value)
    _common(sub.add_parser("theory", help="print asymptotic constants and predictions"))
    _common(sub.add_parser("converge", help="run, fit the power law and compare with theory"),
            Mode.TFUNC.value)
    vp = sub.add_parser("verify", help="quick self-checks against exact oracles")
    vp.add_argument("--quick", action="store_true", help="fewer replicates")
    vp.add_argument("--format", choices=["json", "csv"], default="json")
    return ap


def config_from_args(args) -> ExperimentConfig:
    d = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            d.update(json.load(fh))
    for flag, key in _FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is None:
            continue
        if flag == "N":
            v = parse_N_spec(v)
        d[key] = v
    if "n" not in d:
        raise SystemExit("error: --n is required (flag or config file)")
    d.setdefault("N_grid", parse_N_spec([DEFAULT_N_GRID]))
    if isinstance(d.get("density"), str):
        d["density"] = density_from_config(d["density"], d["n"]).to_config()
    if d.get("mode") == Mode.CONTAINMENT.value and "p" in d and d["p"] > 1:
        d.pop("p")
    return ExperimentConfig.from_dict(d)


def _emit(obj, fmt, header=None, rows=None):
    if fmt == "csv" and header is not None:
        sys.stdout.write(csv_text(header, rows))
    else:
        sys.stdout.write(dumps17(obj) + "\n")


def _constants_for(config, quad_samples):
    density = config.density_spec()
    if config.mode is Mode.LP_DEFICIT:
        return theory_constants(config.n, 1.0 - config.p, 1.0, density, quad_samples)
    return theory_constants(config.n, config.a, config.b, density, quad_samples)


def _run(args, mode):
    config = config_from_args(args)
    if config.mode is not mode:
        config = ExperimentConfig.from_dict({**config.to_dict(), "mode": mode.value})
    report = run_experiment(config, workers=args.workers)
    comparison = None
    if mode is not Mode.CONTAINMENT and config.n >= 2:
        comparison = compare_to_theory(report, _constants_for(config, args.quad_samples))
    if args.out:
        write_report(report, args.out, comparison)
    out = report.to_dict()
    if comparison is not None:
        out["comparison"] = comparison.to_dict()
    if comparison is not None:
        rows = [(r.N, r.mean, r.se, r.prediction1, r.prediction2, r.z) for r in comparison.rows]
    else:
        nan = math.nan
        rows = [(e.N, e.mean, e.std_error, nan, nan, nan) for e in report.estimates]
    _emit(out, args.format, ["N", "mean", "se", "prediction1", "prediction2", "z"], rows)
    return 0


def _theory(args):
    config = config_from_args(args)
    density = config.density_spec()
    if config.mode is Mode.LP_DEFICIT or (args.p is not None and args.a is None):
        q = lp_deficit_constant(config.n, config.p, density, args.quad_samples)
        out = {"n": config.n, "p": config.p, "density": config.density,
               "deficit_constant": q.value, "deficit_constant_se": q.std_error,
               "predicted": [{"N": N, "value": q.value * N ** (-2.0 / (config.n - 1))}
                             for N in config.N_grid]}
        rows = [(r["N"], r["value"]) for r in out["predicted"]]
        _emit(out, args.format, ["N", "deficit"], rows)
        return 0
    k = theory_constants(config.n, config.a, config.b, density, args.quad_samples)
    out = k.to_dict(config.N_grid)
    rows = [(N, k.predicted_one_term(N), k.predicted(N)) for N in config.N_grid]
    _emit(out, args.format, ["N", "prediction1", "prediction2"], rows)
    return 0


def _converge(args):
    config = config_from_args(args)
    if config.target_rel_se is None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "target_rel_se": 0.02})
    report = run_experiment(config, workers=args.workers)
    fit = fit_rate(report)
    comparison = None
    if config.mode is not Mode.CONTAINMENT:
        comparison = compare_to_theory(report, _constants_for(config, args.quad_samples))
    if args.out:
        write_report(report, args.out, comparison, fit)
    out = {"report": report.to_dict(), "ratefit": fit.to_dict()}
    if comparison is not None:
        out["comparison"] = comparison.to_dict()
    _emit(out, args.format, ["slope", "slope_stderr", "intercept", "r_squared"],
          [(fit.slope, fit.slope_stderr, fit.intercept, fit.r_squared)])
    return 0


def _verify(args):
    from .verify import run_checks

    results = run_checks(quick=args.quick)
    _emit({"checks": results, "all_passed": all(r["passed"] for r in results)}, args.format,
          ["check", "passed", "detail"], [(r["name"], r["passed"], r["detail"]) for r in results])
    return 0 if all(r["passed"] for r in results) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "estimate":
            return _run(args, Mode.TFUNC)
        if args.command == "deficit":
            return _run(args, Mode.LP_DEFICIT)
        if args.command == "containment":
            return _run(args, Mode.CONTAINMENT)
        if args.command == "theory":
            return _theory(args)
        if args.command == "converge":
            return _converge(args)
        return _verify(args)
    except (SpherePolyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
