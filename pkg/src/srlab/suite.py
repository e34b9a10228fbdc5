"""Inequality verification suite.

Every functional inequality the curvature-dimension constants imply is
wrapped as a named check producing machine-readable results.  A check
compares an independently computed left and right side and records the
margin (right minus left, or the distance to an identity), the
tolerance it must survive, and a verdict:

* pass          margin >= -tolerance,
* fail          margin below tolerance and statistically significant,
* inconclusive  the statistical error bar exceeds the margin size, so
                the sample neither confirms nor refutes.

Monte Carlo verdicts use a three-sigma tolerance and never coerce
inconclusive to pass.  Reports are deterministic for a fixed seed:
every check derives its own stream from (seed, check id), timings are
kept out of the JSON payload, and results are sorted before writing.

The anchor field names the inequality catalog entry a result
certifies; the catalog is documented in the README.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import calculus, distance, geometry, heat, pde, schedules, spectral
from .jets import Constant, Coordinate, GaussianBump, Polynomial, get_space
from .models import get_model, validate

STEP2_MODELS = ("heisenberg", "free-nilpotent-3", "su2-pair")
PARALLEL_MODELS = ("heisenberg", "free-nilpotent-3", "su2-pair")
ALL_MODELS = ("heisenberg", "free-nilpotent-3", "engel", "su2-pair")


@dataclass
class CheckResult:
    """Outcome of one inequality check."""

    check_id: str
    anchor: str
    model: str
    margin: float
    tolerance: float
    verdict: str
    std_error: float | None = None
    digest: str = ""
    details: dict = field(default_factory=dict)
    runtime: float = 0.0  # seconds; excluded from the JSON report

    def to_json(self) -> dict:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "model": self.model,
            "margin": self.margin,
            "tolerance": self.tolerance,
            "std_error": self.std_error,
            "verdict": self.verdict,
            "digest": self.digest,
            "details": self.details,
        }


def verdict_of(margin: float, tolerance: float, std_error: float | None = None) -> str:
    if margin >= -tolerance:
        return "pass"
    if std_error is not None and std_error > abs(margin):
        return "inconclusive"
    return "fail"


def _mk(check_id, anchor, model, margin, tolerance, seed, std_error=None, **details):
    payload = json.dumps(
        {"check": check_id, "model": model, "seed": seed, "details_keys": sorted(details)},
        sort_keys=True,
    )
    return CheckResult(
        check_id=check_id,
        anchor=anchor,
        model=model,
        margin=float(margin),
        tolerance=float(tolerance),
        verdict=verdict_of(margin, tolerance, std_error),
        std_error=None if std_error is None else float(std_error),
        digest=hashlib.sha256(payload.encode()).hexdigest()[:16],
        details=details,
    )


def derive_seed(seed: int, check_id: str) -> int:
    h = hashlib.sha256(f"{seed}:{check_id}".encode()).digest()
    return int.from_bytes(h[:8], "little") & 0x7FFFFFFF


# ----------------------------------------------------------------------
# Configuration
# ----------------------------------------------------------------------

DEFAULT_CONFIG = {
    "seed": 20260809,
    "models": list(ALL_MODELS),
    "checks": "all",
    "cd": {"functions": 10000, "points": 20, "l_points": 9},
    "double_gamma": {"functions": 500, "points": 20, "l": 1.0, "c": 1.0},
    "condb": {"samples": 1000},
    "commutation": {"functions": 50, "points": 20},
    "ricci": {"directions": 50},
    "spectral": {"rho": 1.0, "j_max": 2.0},
    "mc": {"paths": 100000, "steps": 200},
    "gradient": {"paths": 20000, "steps": 60, "cases": 10, "delta": 1e-3},
    "pde": {"bounds": [5.0, 5.0, 3.0], "shape": [51, 51, 41], "dt": 0.01},
    "schedules": {"horizon": 1.0, "grid": 2048},
    "output": {"json": None, "csv_dir": None},
    "jobs": 1,
}


class ConfigError(ValueError):
    pass


def load_config(doc: dict | str | None) -> dict:
    """Merge a user configuration over the defaults, validating keys."""
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if doc is None:
        return cfg
    if isinstance(doc, str):
        with open(doc) as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    for key, value in doc.items():
        if key not in cfg:
            raise ConfigError(f"unknown configuration key {key!r}")
        if isinstance(cfg[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"configuration key {key!r} must be an object")
            for k2, v2 in value.items():
                if k2 not in cfg[key]:
                    raise ConfigError(f"unknown configuration key {key}.{k2}")
                cfg[key][k2] = v2
        else:
            cfg[key] = value
    return cfg


def _models_in(cfg, allowed) -> list[str]:
    return [m for m in cfg["models"] if m in allowed]


def _l_grid(n: int) -> np.ndarray:
    return np.logspace(-1.0, 1.0, n)


def _constants_for(name: str):
    """Declared-constants route: normalized model plus its constants."""
    model = get_model(name)
    work = geometry.normalize_vertical(model)
    consts = geometry.assemble_constants(model)
    return work, consts


# ----------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------


def check_validate_models(cfg, seed) -> list[CheckResult]:
    out = []
    for name in cfg["models"]:
        report = validate(get_model(name))
        margin = -max(report.jacobi_residual, report.antisymmetry_residual)
        out.append(
            _mk(
                "validate-models",
                "metric-preserving",
                name,
                margin,
                1e-12,
                seed,
                report=report.to_json(),
            )
        )
    return out


def check_cd_sharpness(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    z = Coordinate(3, 2)
    worst = 0.0
    for l in _l_grid(cfg["cd"]["l_points"]):
        worst = max(
            worst,
            abs(
                calculus.cd_residual(
                    model, z, np.zeros(3), l, model.declared_constants
                )
            ),
        )
    return [
        _mk(
            "cd-sharpness",
            "CDstar",
            "heisenberg",
            -worst,
            1e-12,
            seed,
            witness="vertical coordinate at identity",
        )
    ]


def check_cd_sweep(cfg, seed) -> list[CheckResult]:
    out = []
    n_f = cfg["cd"]["functions"]
    n_p = cfg["cd"]["points"]
    grid = _l_grid(cfg["cd"]["l_points"])
    for name in _models_in(cfg, STEP2_MODELS):
        work, consts = _constants_for(name)
        res, scale = calculus.cd_residual_sweep(
            work, consts, n_f, n_p, grid, seed=derive_seed(seed, f"cd:{name}")
        )
        ratio = res / scale
        out.append(
            _mk(
                "cd-sweep",
                "CDstar",
                name,
                float(ratio.min()),
                1e-9,
                seed,
                functions=n_f,
                points=n_p,
                l_grid=list(grid),
                mean_margin=float(ratio.mean()),
            )
        )
    return out


def check_double_gamma(cfg, seed) -> list[CheckResult]:
    out = []
    s = cfg["double_gamma"]
    for name in _models_in(cfg, PARALLEL_MODELS):
        model = get_model(name)
        rep = geometry.geometry_report(model, normalize=False)
        first, second, scale = calculus.double_gamma_sweep(
            model,
            s["functions"],
            s["points"],
            s["l"],
            s["c"],
            rep.rho_H,
            rep.M_HV,
            seed=derive_seed(seed, f"dg:{name}"),
        )
        margin = float(min((first / scale).min(), (second / scale).min()))
        out.append(
            _mk(
                "double-gamma",
                "DoubleGamma",
                name,
                margin,
                1e-9,
                seed,
                first_min=float((first / scale).min()),
                second_min=float((second / scale).min()),
            )
        )
    return out


def check_condition_b(cfg, seed) -> list[CheckResult]:
    out = []
    n = cfg["condb"]["samples"]
    for name in _models_in(cfg, STEP2_MODELS):
        model = get_model(name)
        res, scale = calculus.condb_sweep(
            model, n, seed=derive_seed(seed, f"condb:{name}")
        )
        out.append(
            _mk(
                "condition-b",
                "CondB",
                name,
                -float((res / scale).max()),
                1e-12,
                seed,
                samples=n,
                max_absolute=float(res.max()),
            )
        )
    if "engel" in cfg["models"]:
        model = get_model("engel")
        res, _ = calculus.condb_sweep(model, n, seed=derive_seed(seed, "condb:engel"))
        frac = float((res > 1e-6).mean())
        out.append(
            _mk(
                "condition-b-violation",
                "CondB",
                "engel",
                frac - 0.1,
                0.0,
                seed,
                violating_fraction=frac,
                samples=n,
            )
        )
    return out


def check_commutation(cfg, seed) -> list[CheckResult]:
    out = []
    s = cfg["commutation"]
    for name in _models_in(cfg, PARALLEL_MODELS):
        model = get_model(name)
        res, scale = calculus.commutation_sweep(
            model, s["functions"], s["points"], seed=derive_seed(seed, f"comm:{name}")
        )
        out.append(
            _mk(
                "commutation",
                "srLDeltaCommute",
                name,
                -float((res / scale).max()),
                1e-9,
                seed,
                functions=s["functions"],
                points=s["points"],
            )
        )
    return out


def check_ricci_compare(cfg, seed) -> list[CheckResult]:
    out = []
    for name in _models_in(cfg, PARALLEL_MODELS):
        model = get_model(name)
        worst = geometry.riemann_ricci_compare(
            model, cfg["ricci"]["directions"], seed=derive_seed(seed, f"ricci:{name}")
        )
        out.append(
            _mk(
                "ricci-compare",
                "RiemannRicci",
                name,
                -worst,
                1e-10,
                seed,
                directions=cfg["ricci"]["directions"],
            )
        )
    return out


def check_constants(cfg, seed) -> list[CheckResult]:
    out = []
    for name in cfg["models"]:
        model = get_model(name)
        if model.declared_constants is None:
            continue
        rep = geometry.geometry_report(model)
        consts = geometry.assemble_constants(model)
        dec = model.declared_constants
        dev = max(
            abs(consts.rho1 - dec.rho1),
            abs(consts.rho20 - dec.rho20),
            abs(consts.rho21 - dec.rho21),
            abs(consts.n - dec.n),
        )
        if name in PARALLEL_MODELS:
            dev = max(dev, rep.M_HV, rep.M_grad_v)
        out.append(
            _mk(
                "constants",
                "rhoSR2",
                name,
                -dev,
                1e-9,
                seed,
                constants=consts.to_json(),
                geometry=rep.to_json(),
            )
        )
    return out


def check_spectral_gap(cfg, seed) -> list[CheckResult]:
    rho = cfg["spectral"]["rho"]
    j_max = cfg["spectral"]["j_max"]
    lam1, alpha_chk, gap_chk = spectral.spectral_gap_su2_pair(rho, j_max)
    out = []
    for chk, cid in ((alpha_chk, "spectral-alpha"), (gap_chk, "spectral-gap")):
        margin = chk["margin"] if chk["stable"] else -np.inf
        out.append(
            _mk(
                cid,
                chk["anchor"],
                f"su2-pair-rho{rho:g}",
                margin,
                0.0,
                seed,
                bound=chk["bound"],
                neg_lambda1=chk["neg_lambda1"],
                stable=chk["stable"],
            )
        )
    return out


def check_semigroup_identity(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    est = heat.mc_semigroup(
        model, Constant(3, 1.0), np.zeros(3), 1.0, 10000, 50, derive_seed(seed, "sg1")
    )
    out = [
        _mk(
            "semigroup-identity",
            "CondA",
            "heisenberg",
            -abs(est.value - 1.0),
            0.0,
            seed,
            value=est.value,
        )
    ]
    f = Polynomial.monomial(3, (2, 0, 0))
    x = np.array([0.3, -0.2, 0.1])
    est0 = heat.mc_semigroup(model, f, x, 0.0, 100, 1, derive_seed(seed, "sg0"))
    out.append(
        _mk(
            "semigroup-t0",
            "CondA",
            "heisenberg",
            # paths sit exactly at x; the tolerance only absorbs the
            # rounding of the sample mean
            -abs(est0.value - float(np.squeeze(f.eval(x)))),
            1e-14,
            seed,
            value=est0.value,
        )
    )
    return out


def check_semigroup_x2(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    t = 1.0
    est = heat.mc_semigroup(
        model,
        Polynomial.monomial(3, (2, 0, 0)),
        np.zeros(3),
        t,
        cfg["mc"]["paths"],
        cfg["mc"]["steps"],
        derive_seed(seed, "sgx2"),
    )
    dev = abs(est.value - t)
    return [
        _mk(
            "semigroup-x2",
            "LiftedL",
            "heisenberg",
            3.0 * est.std_error - dev,
            0.0,
            seed,
            std_error=est.std_error,
            value=est.value,
            expected=t,
            paths=est.paths,
            steps=est.steps,
        )
    ]


def _gradient_cases(model, cfg, seed):
    g = cfg["gradient"]
    rng = np.random.default_rng(derive_seed(seed, "grad-cases"))
    n_terms = get_space(model.dim, 3).terms(3)
    times = (0.25, 0.5, 1.0)
    cases = []
    for k in range(g["cases"]):
        coeffs = rng.uniform(-0.5, 0.5, n_terms)
        x = rng.uniform(-0.5, 0.5, model.dim)
        cases.append((Polynomial(model.dim, 3, coeffs), x, times[k % len(times)]))
    return cases


def check_gradient_bound_a(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    _, consts = _constants_for("heisenberg")
    g = cfg["gradient"]
    l = 1.0
    alpha = min(consts.rho1 - 1.0 / l, consts.rho21 + consts.rho20 / l)
    out = []
    for k, (f, x, t) in enumerate(_gradient_cases(model, cfg, seed)):
        s = derive_seed(seed, f"grad-a:{k}")
        lhs, lhs_err = heat.mc_gamma_mixed(
            model, f, x, t, l, g["paths"], g["steps"], s, g["delta"]
        )
        rhs_est = heat.mc_semigroup(
            model,
            heat.FrameGammaIntegrand(model, f, "mixed", l),
            x,
            t,
            g["paths"],
            g["steps"],
            s,
        )
        rhs = np.exp(-alpha * t) * rhs_est.value
        err = float(np.hypot(lhs_err, np.exp(-alpha * t) * rhs_est.std_error))
        out.append(
            _mk(
                "gradient-bound-a",
                "GradBound(a)",
                "heisenberg",
                rhs - lhs,
                3.0 * err,
                seed,
                std_error=err,
                case=k,
                t=t,
                lhs=lhs,
                rhs=rhs,
            )
        )
    return out


def check_gradient_bound_b(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    _, consts = _constants_for("heisenberg")
    g = cfg["gradient"]
    k1 = max(0.0, -consts.rho1)
    k2 = max(0.0, -consts.rho21)
    out = []
    for k, (f, x, t) in enumerate(_gradient_cases(model, cfg, seed)):
        s = derive_seed(seed, f"grad-b:{k}")
        gh = heat.mc_gradient(model, f, x, t, "h", g["paths"], g["steps"], s, g["delta"])
        var, var_err = heat.mc_variance(model, f, x, t, g["paths"], g["steps"], s)
        factor = 1.0 + 2.0 / consts.rho20 + (k1 + k2 / consts.rho20) * t
        margin = factor * var - t * gh.value
        err = float(np.hypot(factor * var_err, t * gh.std_error))
        out.append(
            _mk(
                "gradient-bound-b",
                "GradBound(b)",
                "heisenberg",
                margin,
                3.0 * err,
                seed,
                std_error=err,
                case=k,
                t=t,
                lhs=t * gh.value,
                rhs=factor * var,
            )
        )
    return out


def check_vertical_gradient(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    g = cfg["gradient"]
    out = []
    for k, (f, x, t) in enumerate(_gradient_cases(model, cfg, seed)):
        s = derive_seed(seed, f"grad-v:{k}")
        gv = heat.mc_gradient(model, f, x, t, "v", g["paths"], g["steps"], s, g["delta"])
        lhs = float(np.sqrt(max(gv.value, 0.0)))
        lhs_err = gv.std_error / (2.0 * lhs) if lhs > 1e-12 else gv.std_error
        rhs_est = heat.mc_semigroup(
            model,
            heat.FrameGammaIntegrand(model, f, "v", transform=np.sqrt),
            x,
            t,
            g["paths"],
            g["steps"],
            s,
        )
        err = float(np.hypot(lhs_err, rhs_est.std_error))
        out.append(
            _mk(
                "vertical-gradient",
                "CondARiemann",
                "heisenberg",
                rhs_est.value - lhs,
                3.0 * err,
                seed,
                std_error=err,
                case=k,
                t=t,
                lhs=lhs,
                rhs=rhs_est.value,
            )
        )
    return out


# -- PDE-based checks ---------------------------------------------------


def _pde_solver(cfg):
    p = cfg["pde"]
    return pde.HeisenbergHeatSolver(
        get_model("heisenberg"),
        bounds=tuple(p["bounds"]),
        shape=tuple(p["shape"]),
        dt=p["dt"],
    )


def _sample_points(rng, n, radius=1.2):
    pts = rng.uniform(-radius, radius, (n, 3))
    pts[:, 2] *= 0.5
    return pts


def check_liyau(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    _, consts = _constants_for("heisenberg")
    solver = _pde_solver(cfg)
    f = GaussianBump(np.zeros(3), 0.5)
    times = [0.3, 0.5, 1.0]
    u0 = solver.sample(f)
    fields = solver.evolve(u0, times)
    rng = np.random.default_rng(derive_seed(seed, "liyau-pts"))
    pts = np.vstack([np.zeros((1, 3)), _sample_points(rng, 8, radius=0.8)])
    out = []
    rho1, rho2 = consts.rho1, consts.rho20
    n = consts.n
    for fld in fields:
        u = fld.values
        lu = solver.apply_laplacian(u)
        gh = solver.gamma_h(u)
        uv = solver.interpolate(u, pts)
        lv = solver.interpolate(lu, pts)
        gv = solver.interpolate(gh, pts)
        # dimensional form
        lhs = gv / uv**2 / consts.D - lv / uv
        rhs = consts.N / fld.t
        margin = float((rhs - lhs).min())
        out.append(
            _mk(
                "li-yau",
                "LY2",
                "heisenberg",
                margin,
                0.05 * rhs,
                seed,
                t=fld.t,
                rhs=rhs,
                worst_lhs=float(lhs.max()),
                N=consts.N,
                D=consts.D,
            )
        )
        # beta-grid form
        worst = np.inf
        for beta in (1.2, 1.4, 1.6, 1.8):
            a_b = (rho2 + beta) / rho2
            b_b = (beta - 1.0) / beta
            lhs_b = gv / uv**2 - (a_b - b_b * rho1 * fld.t) * lv / uv
            rhs_b = (n / (4.0 * fld.t)) * (
                a_b**2 / ((2.0 - beta) * (beta - 1.0))
                - rho1 * fld.t * (2.0 * a_b - b_b * rho1 * fld.t)
            )
            worst = min(worst, float((rhs_b - lhs_b).min() / abs(rhs_b)))
        out.append(
            _mk(
                "li-yau-family",
                "LY",
                "heisenberg",
                worst,
                0.05,
                seed,
                t=fld.t,
            )
        )
    # entropy bound off the bump center, first snapshot
    fld = fields[0]
    x0 = np.array([0.5, 0.3, 0.0])
    flogf0 = np.where(u0 > 0, u0 * np.log(np.where(u0 > 0, u0, 1.0)), 0.0)
    ent_fields = solver.evolve(flogf0, [fld.t])
    u = fld.values
    lu = solver.apply_laplacian(u)
    c0 = float(solver.interpolate(u, x0))
    ent = float(solver.interpolate(ent_fields[0].values, x0))
    gh0 = float(solver.interpolate(solver.gamma_h(u), x0))
    lhs_e = 0.5 * fld.t * gh0 / c0**2
    rhs_e = (1.0 + 2.0 / rho2) * (ent - c0 * np.log(c0)) / c0
    out.append(
        _mk(
            "entropy-bound",
            "EntropyLY(a)",
            "heisenberg",
            rhs_e - lhs_e,
            0.05 * abs(rhs_e),
            seed,
            t=fld.t,
            lhs=lhs_e,
            rhs=rhs_e,
        )
    )
    # chain-rule identities behind the entropy bound: exact on jets,
    # discretization-limited on the grid
    from .jets import ShiftedSquare
    rng = np.random.default_rng(derive_seed(seed, "logid"))
    pos = ShiftedSquare(Polynomial.random(3, 3, rng), 0.5)
    r1, r2 = calculus.log_identity_residuals(model, pos, np.array([0.2, -0.1, 0.3]))
    jet_resid = float(max(np.max(r1), np.max(r2)))
    mask = u > 0.25 * u.max()
    floor = 1e-12 * u.max()
    uc = np.clip(u, floor, None)
    logu = np.log(uc)
    # (L/2 + d/dt)(u log u) for the backward solution u_s = P_(t-s) f,
    # whose time derivative is -L u / 2
    lhs_d = 0.5 * solver.apply_laplacian(uc * logu) - (1.0 + logu) * 0.5 * lu
    rhs_d = 0.5 * solver.gamma_h(u) / uc
    rel = np.abs(lhs_d - rhs_d) / (1.0 + np.abs(lhs_d) + np.abs(rhs_d))
    grid_resid = float(np.where(mask, rel, 0.0).max())
    out.append(
        _mk(
            "log-identity-jet",
            "partialtL",
            "heisenberg",
            -jet_resid,
            1e-10,
            seed,
            note="chain rule evaluated in exact jet arithmetic",
        )
    )
    out.append(
        _mk(
            "log-identity-grid",
            "partialtL",
            "heisenberg",
            -grid_resid,
            5e-2,
            seed,
            spacing=list(solver.spacing),
            note="finite differences on the resolved bulk of the field; "
            "tolerance is the discretization bound",
        )
    )
    return out


def check_harnack(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    _, consts = _constants_for("heisenberg")
    solver = _pde_solver(cfg)
    f = GaussianBump(np.zeros(3), 0.5)
    pairs_t = [(0.3, 0.5), (0.4, 0.8), (0.5, 1.0)]
    times = sorted({t for p in pairs_t for t in p})
    fields = {
        fld.t: fld for fld in solver.evolve(solver.sample(f), times)
    }
    rng = np.random.default_rng(derive_seed(seed, "harnack-pts"))
    out = []
    count = 0
    worst = np.inf
    worst_std = None
    for t0, t1 in pairs_t:
        u0f = fields[t0]
        u1f = fields[t1]
        for _ in range(7):
            x = _sample_points(rng, 1)[0] * 0.8
            y = x + rng.uniform(-0.6, 0.6, 3) * np.array([1, 1, 0.3])
            dmt = distance.cc_distance(model, x, y)
            lhs = float(solver.interpolate(u0f.values, x))
            p1 = float(solver.interpolate(u1f.values, y))
            factor = (t1 / t0) ** (consts.N / 2.0)
            rhs_cons = p1 * factor * np.exp(
                consts.D * dmt.lower**2 / (2.0 * (t1 - t0))
            )
            rel = (rhs_cons - lhs) / abs(rhs_cons)
            if rel < worst:
                worst = rel
            count += 1
    out.append(
        _mk(
            "harnack",
            "ParabolHarnack",
            "heisenberg",
            float(worst),
            0.05,
            seed,
            samples=count,
            note="conservative direction: lower distance bound in the exponent",
        )
    )
    # kernel variant on a 3-point sample
    pts = [np.zeros(3), np.array([0.5, 0.2, 0.0]), np.array([-0.3, 0.4, 0.1])]
    t0, t1 = 0.4, 0.8
    kworst = np.inf
    for y in pts[1:]:
        k0 = pde.heat_kernel(model, pts[0], y, [t0], solver=solver)[0]
        for z in pts:
            if np.allclose(z, y):
                continue
            k1 = pde.heat_kernel(model, pts[0], z, [t1], solver=solver)[0]
            dyz = distance.cc_distance(model, y, z)
            rhs = (
                k1.value
                * (t1 / t0) ** (consts.N / 2.0)
                * np.exp(consts.D * dyz.lower**2 / (2.0 * (t1 - t0)))
            )
            kworst = min(kworst, (rhs - k0.value) / abs(rhs))
    out.append(
        _mk(
            "harnack-kernel",
            "ParabolHarnack",
            "heisenberg",
            float(kworst),
            0.05,
            seed,
            t0=t0,
            t1=t1,
        )
    )
    return out


def check_kernel_decay(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    _, consts = _constants_for("heisenberg")
    solver = _pde_solver(cfg)
    tgrid = [0.2, 0.4, 0.6, 0.8, 1.0]
    readings = pde.heat_kernel(model, np.zeros(3), np.zeros(3), tgrid, solver=solver)
    vals = np.array([r.value for r in readings])
    # on-diagonal kernel must decrease along the grid
    dec_margin = float(np.min(vals[:-1] - vals[1:]) / vals[0])
    out = [
        _mk(
            "kernel-decay",
            "pzcknn(b)",
            "heisenberg",
            dec_margin,
            0.0,
            seed,
            values={f"{t:g}": float(v) for t, v in zip(tgrid, vals)},
        )
    ]
    # dimensional bound p_t <= t^(-N/2) p_1 for t <= 1
    p1 = vals[-1]
    bound = np.array(tgrid) ** (-consts.N / 2.0) * p1
    rel = float(((bound - vals) / bound).min())
    product = vals * np.array(tgrid) ** (consts.N / 2.0)
    out.append(
        _mk(
            "kernel-dimension-bound",
            "pzcknn(b)",
            "heisenberg",
            rel,
            0.05,
            seed,
            product_nonincreasing_fraction=float(
                (product[1:] <= product[:-1] + 1e-15).mean()
            ),
            note="the weighted kernel t^(N/2) p_t increases toward its t=1 bound",
        )
    )
    return out


def check_poincare_decay(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    _, consts = _constants_for("heisenberg")
    solver = _pde_solver(cfg)
    f = GaussianBump(np.zeros(3), 0.5)
    tgrid = [0.2, 0.4, 0.6, 0.8, 1.0]
    fields = solver.evolve(solver.sample(f), [0.0] + tgrid)
    norms = [solver.l1_norm(solver.gamma_h(fld.values)) for fld in fields]
    base = norms[0]
    k = min(consts.rho1, consts.rho21)
    margins = [
        (np.exp(-k * t) * base - nv) / base for t, nv in zip(tgrid, norms[1:])
    ]
    return [
        _mk(
            "poincare-decay",
            "Poincare(a)",
            "heisenberg",
            float(min(margins)),
            1e-2,
            seed,
            rate=k,
            norms={f"{t:g}": float(v) for t, v in zip([0.0] + tgrid, norms)},
        )
    ]


def check_schedules(cfg, seed) -> list[CheckResult]:
    out = []
    s = cfg["schedules"]
    for name in _models_in(cfg, PARALLEL_MODELS):
        _, consts = _constants_for(name)
        built, skipped = schedules.builtin_schedules(
            consts, s["horizon"], n=s["grid"]
        )
        worst = np.inf
        labels = []
        for sched in built:
            chk = schedules.admissibility_margins(sched, consts)
            worst = min(worst, chk.margin)
            labels.append(sched.label)
        details = {"schedules": labels, "skipped": skipped}
        if consts.rho1 > 0:
            mono = schedules.ratio_monotonicity(
                schedules.gradient_variance_exponential(consts, s["horizon"], s["grid"])
            )
            details["ratio_monotonicity_min"] = float(mono)
            if mono <= 0:
                worst = min(worst, -1.0)
        out.append(
            _mk(
                "schedules",
                "ALambdaC",
                name,
                float(worst),
                1e-8,
                seed,
                **details,
            )
        )
    return out


def check_distance(cfg, seed) -> list[CheckResult]:
    model = get_model("heisenberg")
    rng = np.random.default_rng(derive_seed(seed, "dist"))
    worst = np.inf
    for _ in range(100):
        a, b, c = rng.uniform(-1.0, 1.0, (3, 3))
        dab = distance.cc_distance(model, a, b).value
        dbc = distance.cc_distance(model, b, c).value
        dac = distance.cc_distance(model, a, c).value
        worst = min(worst, dab + dbc - dac)
    unit = distance.cc_distance(model, np.zeros(3), [1.0, 0.0, 0.0])
    return [
        _mk(
            "distance-triangle",
            "dcc",
            "heisenberg",
            float(worst),
            1e-9,
            seed,
            triples=100,
        ),
        _mk(
            "distance-unit",
            "dcc",
            "heisenberg",
            -abs(unit.value - 1.0),
            1e-9,
            seed,
            estimate=unit.to_json(),
        ),
    ]


CHECKS = {
    "validate-models": check_validate_models,
    "constants": check_constants,
    "cd-sharpness": check_cd_sharpness,
    "cd-sweep": check_cd_sweep,
    "double-gamma": check_double_gamma,
    "condition-b": check_condition_b,
    "commutation": check_commutation,
    "ricci-compare": check_ricci_compare,
    "spectral-gap": check_spectral_gap,
    "semigroup-identity": check_semigroup_identity,
    "semigroup-x2": check_semigroup_x2,
    "gradient-bound-a": check_gradient_bound_a,
    "gradient-bound-b": check_gradient_bound_b,
    "vertical-gradient": check_vertical_gradient,
    "li-yau": check_liyau,
    "harnack": check_harnack,
    "kernel-decay": check_kernel_decay,
    "poincare-decay": check_poincare_decay,
    "schedules": check_schedules,
    "distance": check_distance,
}

CSV_COLUMNS = [
    "check_id",
    "anchor",
    "model",
    "margin",
    "tolerance",
    "std_error",
    "verdict",
    "digest",
]


def run_suite(config: dict | str | None = None) -> tuple[dict, int]:
    """Run the configured checks and assemble the report.

    Returns (report, exit_code) with exit code 0 when everything
    passed, 1 on any failure (inconclusive results are counted but do
    not fail the run), and raises ConfigError for malformed input.
    """
    cfg = load_config(config)
    requested = cfg["checks"]
    if requested == "all":
        requested = list(CHECKS)
    unknown = [c for c in requested if c not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown check ids: {unknown}")

    seed = cfg["seed"]
    results: list[CheckResult] = []
    timings: dict[str, float] = {}

    def run_one(cid):
        t0 = time.perf_counter()
        rows = CHECKS[cid](cfg, seed)
        elapsed = time.perf_counter() - t0
        for r in rows:
            r.runtime = elapsed / max(len(rows), 1)
        return cid, rows, elapsed

    jobs = int(cfg.get("jobs", 1))
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for cid, rows, elapsed in pool.map(run_one, requested):
                results.extend(rows)
                timings[cid] = elapsed
    else:
        for cid in requested:
            cid, rows, elapsed = run_one(cid)
            results.extend(rows)
            timings[cid] = elapsed

    results.sort(key=lambda r: (r.check_id, r.model, r.digest))
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    for r in results:
        counts[r.verdict] += 1
    cfg_for_digest = json.dumps(
        {k: v for k, v in cfg.items() if k != "output"}, sort_keys=True
    )
    report = {
        "config_digest": hashlib.sha256(cfg_for_digest.encode()).hexdigest()[:16],
        "seed": seed,
        "summary": counts,
        "results": [r.to_json() for r in results],
    }

    out = cfg["output"]
    if out.get("json"):
        Path(out["json"]).write_text(json.dumps(report, sort_keys=True, indent=1))
    if out.get("csv_dir"):
        csv_dir = Path(out["csv_dir"])
        csv_dir.mkdir(parents=True, exist_ok=True)
        lines = [",".join(CSV_COLUMNS)]
        for r in results:
            row = r.to_json()
            lines.append(
                ",".join(
                    "" if row[c] is None else str(row[c]) for c in CSV_COLUMNS
                )
            )
        (csv_dir / "results.csv").write_text("\n".join(lines) + "\n")
        tlines = ["check_id,seconds"]
        for cid in requested:
            tlines.append(f"{cid},{timings[cid]:.3f}")
        (csv_dir / "timings.csv").write_text("\n".join(tlines) + "\n")

    exit_code = 1 if counts["fail"] else 0
    return report, exit_code
