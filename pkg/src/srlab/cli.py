"""Command line interface."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import calculus, distance, geometry, heat, spectral, suite
from .jets import Polynomial
from .models import MODEL_BUILDERS, get_model, validate


def _print(doc):
    print(json.dumps(doc, indent=2, sort_keys=True, default=str))


def cmd_models(args):
    for name in sorted(MODEL_BUILDERS):
        model = get_model(name)
        line = f"{name:18s} dim_h={model.dim_h} dim_v={model.dim_v} step={model.step}"
        if args.validate:
            rep = validate(model)
            line += f"  valid={rep.passed}"
            if not rep.passed:
                line += f"  issues={rep.issues}"
        print(line)
    return 0


def cmd_constants(args):
    model = get_model(args.model)
    rep = geometry.geometry_report(model, normalize=not args.raw)
    doc = {"geometry": rep.to_json()}
    if not args.raw:
        try:
            doc["constants"] = geometry.assemble_constants(
                model, objective=args.objective
            ).to_json()
        except ValueError as err:
            # step-3 models have m_R = 0, so no positive-constant set exists
            doc["constants_error"] = str(err)
    _print(doc)
    return 0


def cmd_cd_check(args):
    model = get_model(args.model)
    work = geometry.normalize_vertical(model)
    consts = geometry.assemble_constants(model)
    res, scale = calculus.cd_residual_sweep(
        work,
        consts,
        args.functions,
        args.points,
        np.logspace(-1, 1, 9),
        seed=args.seed,
    )
    ratio = res / scale
    _print(
        {
            "model": args.model,
            "constants": consts.to_json(),
            "functions": args.functions,
            "points": args.points,
            "min_margin": float(ratio.min()),
            "mean_margin": float(ratio.mean()),
            "violations": int((ratio < -1e-9).sum()),
        }
    )
    return 0 if ratio.min() >= -1e-9 else 1


def cmd_heat(args):
    model = get_model(args.model)
    f = Polynomial.monomial(model.dim, tuple([2] + [0] * (model.dim - 1)))
    est = heat.mc_semigroup(
        model, f, np.zeros(model.dim), args.t, args.paths, args.steps, args.seed
    )
    _print(est.to_json())
    return 0


def cmd_distance(args):
    model = get_model(args.model)
    if args.x is None or args.y is None:
        rng = np.random.default_rng(args.seed)
        x, y = rng.uniform(-0.5, 0.5, (2, model.dim))
    else:
        x = np.asarray(args.x, dtype=float)
        y = np.asarray(args.y, dtype=float)
    est = distance.cc_distance(model, x, y, epsilon=args.epsilon)
    _print({"x": list(x), "y": list(y), "estimate": est.to_json()})
    return 0


def cmd_spectral(args):
    lam1, alpha_chk, gap_chk = spectral.spectral_gap_su2_pair(args.rho, args.jmax)
    _print({"lambda1": lam1, "alpha_bound": alpha_chk, "gap_bound": gap_chk})
    ok = alpha_chk["margin"] >= 0 and gap_chk["margin"] >= 0 and alpha_chk["stable"]
    return 0 if ok else 1


def cmd_suite_run(args):
    try:
        cfg = suite.load_config(args.config)
    except (suite.ConfigError, OSError, json.JSONDecodeError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else args.global_seed
    if seed is not None:
        cfg["seed"] = seed
    json_out = args.json if args.json is not None else args.global_json
    if json_out is not None:
        cfg["output"]["json"] = json_out
    csv_dir = args.csv_dir if args.csv_dir is not None else args.global_csv_dir
    if csv_dir is not None:
        cfg["output"]["csv_dir"] = csv_dir
    jobs = args.jobs if args.jobs is not None else args.global_jobs
    if jobs is not None:
        cfg["jobs"] = jobs
    if args.checks:
        cfg["checks"] = args.checks
    try:
        report, code = suite.run_suite(cfg)
    except suite.ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    summary = report["summary"]
    for row in report["results"]:
        print(
            f"[{row['verdict']:>12s}] {row['check_id']:24s} {row['model']:20s} "
            f"margin={row['margin']:.3e} tol={row['tolerance']:.1e}"
        )
    print(
        f"pass={summary['pass']} fail={summary['fail']} "
        f"inconclusive={summary['inconclusive']}"
    )
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="srlab",
        description="curvature-dimension verification lab for sub-Riemannian models",
    )
    p.add_argument("--seed", dest="global_seed", type=int, default=None,
                   help="override the RNG seed")
    p.add_argument("--json", dest="global_json", default=None,
                   help="JSON report path (suite runs)")
    p.add_argument("--csv-dir", dest="global_csv_dir", default=None,
                   help="CSV output directory (suite runs)")
    p.add_argument("--jobs", dest="global_jobs", type=int, default=None,
                   help="worker pool size (suite runs)")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("models", help="list and validate the shipped models")
    q.add_argument("--validate", action="store_true")
    q.set_defaults(fn=cmd_models)

    q = sub.add_parser("constants", help="geometry report and derived constants")
    q.add_argument("model")
    q.add_argument("--objective", default="max_alpha",
                   choices=["max_alpha", "rho1_zero", "max_rho2"])
    q.add_argument("--raw", action="store_true", help="skip vertical normalization")
    q.set_defaults(fn=cmd_constants)

    q = sub.add_parser("cd-check", help="sampled curvature-dimension residuals")
    q.add_argument("model")
    q.add_argument("--functions", type=int, default=1000)
    q.add_argument("--points", type=int, default=10)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=cmd_cd_check)

    q = sub.add_parser("heat", help="Monte Carlo semigroup sample")
    q.add_argument("model")
    q.add_argument("--t", type=float, default=1.0)
    q.add_argument("--paths", type=int, default=20000)
    q.add_argument("--steps", type=int, default=100)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=cmd_heat)

    q = sub.add_parser("distance", help="Carnot-Caratheodory distance estimate")
    q.add_argument("model")
    q.add_argument("--x", type=float, nargs="+", default=None)
    q.add_argument("--y", type=float, nargs="+", default=None)
    q.add_argument("--epsilon", type=float, default=0.1)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=cmd_distance)

    q = sub.add_parser("spectral", help="spectral gap oracle on SU(2) x SU(2)")
    q.add_argument("--rho", type=float, default=1.0)
    q.add_argument("--jmax", type=float, default=2.0)
    q.set_defaults(fn=cmd_spectral)

    q = sub.add_parser("suite", help="verification suite")
    qq = q.add_subparsers(dest="suite_command", required=True)
    r = qq.add_parser("run", help="run configured checks")
    r.add_argument("--config", default=None, help="JSON configuration path")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--json", default=None, help="write the JSON report here")
    r.add_argument("--csv-dir", default=None, help="write CSV tables here")
    r.add_argument("--jobs", type=int, default=None)
    r.add_argument("--checks", nargs="+", default=None, help="subset of check ids")
    r.set_defaults(fn=cmd_suite_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
